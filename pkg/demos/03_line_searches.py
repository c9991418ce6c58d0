# %% [markdown]
# # Gradient-only line searches
#
# Along a direction the only thing the searches look at is the sign of the
# directional derivative. Start with the deterministic quadratic
# F(a) = (a - 2)^2, whose slope changes sign at a = 2.

# %%
import numpy as np

from golsnet import data, linesearch as ls, network as net


class Parabola:
    """L(x) = (x - 2)^2 in one dimension, shaped like an EvalContext."""

    fe_counter = 0

    def evaluate(self, x, update_stats=False):
        self.fe_counter += 1
        return float((x[0] - 2) ** 2), 2 * (x - 2), None


x0, d = np.zeros(1), np.ones(1)
print("GOLS-B from 0.01:", ls.gols_b(Parabola(), x0, d, ls.GolsConfig(min_step=0.01, max_evals_per_search=60)))
print("GOLS-I grow from 0.25:", ls.gols_i(Parabola(), x0, d, 0.25))
print("GOLS-I shrink from 4:", ls.gols_i(Parabola(), x0, d, 4.0))

# %% [markdown]
# On a real network with a fresh mini-batch per evaluation the directional
# derivative is noisy and changes sign many times along the same direction.
# Full-batch evaluation sees a single crossing.

# %%
split = data.prepare("iris")
spec = net.mlp(4, [10], 3, "tanh")
x = net.init_params(spec, 0)
full = ls.EvalContext(spec, "mse", split.train)
g = full.evaluate(x)[1]
d = -g / np.linalg.norm(g)
dynamic = ls.EvalContext(spec, "mse", split.train, batch_size=8, rng=np.random.default_rng(0))
alphas = np.linspace(0, 10, 201)
for name, ctx in (("full", full), ("dynamic", dynamic)):
    samples = [ls.eval_along(ctx, x, d, a) for a in alphas]
    cells = ls.snngpp_scan(samples)
    print(f"{name:>8}: {len(cells)} sign change(s)", cells[:4])
    if cells:
        print(f"{'':>8}  hull of the crossings {ls.b_epsilon_estimate(cells)}")
