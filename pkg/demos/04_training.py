# %% [markdown]
# # Training with line-search step sizes
#
# The same network trained three ways: GOLS-I, GOLS-B and a fixed step.
# Each iteration costs one function evaluation for the direction plus
# whatever the line search spends.

# %%
import numpy as np

from golsnet import data, network as net, optim

split = data.prepare("iris")
spec = net.mlp(4, [8], 3, "tanh", output_activation=True)
for step in ("gols-i", "gols-b", "fixed:0.05"):
    cfg = optim.TrainConfig(spec, split, step=step, batch_size=32, budget=optim.iterations(300), seed=0)
    log = optim.train(cfg)
    steps = log.column("step")
    print(f"{step:>10}: train loss {log.initial['train_loss']:.3f} -> {log.final('train_loss'):.3f}, "
          f"test error {log.final('test_error'):.3f}, median step {np.median(steps):.3g}, "
          f"FEs/iteration {log.rows[-1][1] / len(log):.1f}")

# %% [markdown]
# Adagrad directions and a budget counted in function evaluations.

# %%
cfg = optim.TrainConfig(spec, split, direction="adagrad", budget=optim.function_evaluations(600), seed=0)
log = optim.train(cfg)
print(f"adagrad: {len(log)} iterations in {log.rows[-1][1]} FEs, final loss {log.final('train_loss'):.3f}")

# %% [markdown]
# Several seeds at once, with per-iteration mean and median.

# %%
res = optim.multi_run(optim.TrainConfig(spec, split, budget=optim.iterations(200)), seeds=range(5))
print("median train loss at iterations 1, 100, 200:",
      np.round(res.aggregate["train_loss"]["median"][[0, 99, 199]], 4))
