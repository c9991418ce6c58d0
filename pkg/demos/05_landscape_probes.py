# %% [markdown]
# # Loss-landscape probes
#
# A contour of the full-batch loss on a 21 x 21 grid around the initial
# weights, along two random perpendicular unit directions, for each
# activation. Saturating activations give flatter landscapes.

# %%
import numpy as np

from golsnet import data, linesearch as ls, network as net, probe

split = data.prepare("iris")
for name in ("sigmoid", "tanh", "softsign", "relu", "lrelu", "elu"):
    spec = net.mlp(4, [10], 3, name, output_activation=True)
    ctx = ls.EvalContext(spec, "mse", split.train)
    grid = probe.contour(ctx, net.init_params(spec, 0), seed=0)
    print(f"{name:>8}: grid {grid.values.shape}, loss range {grid.value_range:.3f}")

# %% [markdown]
# Univariate sweeps along the normalised diagonal (u1 + u2) / |u1 + u2|,
# full batch and with a fresh batch of 32 per point. `to_csv` writes
# plot-ready files.

# %%
spec = net.mlp(4, [10], 3, "tanh", output_activation=True)
x0 = net.init_params(spec, 0)
u1, u2 = probe.random_orthonormal_pair(spec.n_params, seed=0)
d = probe.diagonal_direction(u1, u2)
alphas = np.linspace(0, 10, 201)
full = probe.sweep(ls.EvalContext(spec, "mse", split.train), x0, d, alphas)
dyn = probe.sweep(ls.EvalContext(spec, "mse", split.train, 32, np.random.default_rng(1)), x0, d, alphas)
for r in (full, dyn):
    cells = [(round(float(a), 2), round(float(b), 2)) for a, b in r.sign_changes()]
    print(f"{r.mode:>12}: {len(cells)} sign change(s) {cells}")
