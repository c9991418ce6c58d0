# %% [markdown]
# # Networks, flat parameter vectors and gradients
#
# A network is a frozen description (`NetworkSpec`); its weights live in one
# flat float64 vector so line searches can move along a direction with
# `x + alpha * d`.

# %%
import numpy as np

from golsnet import data, network as net
from golsnet.loss import batch_loss

split = data.prepare("iris")
spec = net.mlp(4, [8], 3, "relu", batchnorm=True)
params = net.init_params(spec, seed=0)
print(spec.n_params, "parameters")
for name, offset, shape in net.param_layout(spec):
    print(f"  {name:<16} offset {offset:>3} shape {shape}")

# %% [markdown]
# Forward in train mode, backward with the loss gradient, and a finite
# difference check on a few coordinates.

# %%
x, t = split.train.inputs[:16], split.train.targets[:16]
out, cache = net.forward(spec, params, x)
value, dout = batch_loss("mse", out, t)
grad = net.backward(spec, params, cache, dout)
print("loss", value, "gradient density", net.gradient_density(grad))

for i in (0, 10, 40, spec.n_params - 1):
    h = 1e-6
    up, down = params.copy(), params.copy()
    up[i] += h
    down[i] -= h
    fd = (batch_loss("mse", net.forward(spec, up, x)[0], t)[0]
          - batch_loss("mse", net.forward(spec, down, x)[0], t)[0]) / (2 * h)
    print(f"  p[{i:>2}] analytic {grad[i]: .8f}  finite difference {fd: .8f}")

# %% [markdown]
# A residual block adds its input back on; with all weights zero the block
# is the identity.

# %%
res = net.residual_mlp(4, 4, 1, 3, "relu")
for layer in res.layers:
    print(" ", type(layer).__name__)
