# %% [markdown]
# # Activation functions
#
# Six activations in two families. The saturating ones (sigmoid, tanh,
# softsign) flatten out for large inputs; the sparse ones (relu, lrelu, elu)
# are linear for positive inputs and (nearly) flat for negative ones.

# %%
import numpy as np

from golsnet.activations import activation, af_class, af_derivative, af_value

z = np.linspace(-4, 4, 9)
for name in ("sigmoid", "tanh", "softsign", "relu", "lrelu", "elu"):
    kind = activation(name)
    print(f"{name:>8} [{af_class(kind).value:>10}]  f: {np.round(af_value(kind, z), 3)}")
    print(f"{'':>8} {'':>12}  f': {np.round(af_derivative(kind, z), 3)}")

# %% [markdown]
# Scaled and shifted variants: `0.5 * tanh + 0.5` has the same range as the
# sigmoid but a steeper slope at the origin; `2 * sigmoid - 1` passes through
# the origin.

# %%
half_tanh = activation("tanh", scale=0.5, offset=0.5)
centred_sigmoid = activation("sigmoid", scale=2.0, offset=-1.0)
print(half_tanh.name, af_value(half_tanh, 0.0), af_derivative(half_tanh, 0.0))
print(centred_sigmoid.name, af_value(centred_sigmoid, 0.0), af_derivative(centred_sigmoid, 0.0))

# %% [markdown]
# At kinks the right derivative is used, so relu'(0) = 1.

# %%
print("relu'(0) =", af_derivative(activation("relu"), 0.0))
