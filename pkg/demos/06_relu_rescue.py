# %% [markdown]
# # Keeping ReLU gradients dense
#
# Large steps can push every input of a ReLU unit into its flat region, so
# the unit (and everything feeding it) stops receiving gradient. Batch
# normalisation re-centres the inputs, and skip connections carry the signal
# around dead units. Gradient density is the fraction of non-zero gradient
# entries at each iteration.

# %%
import numpy as np

from golsnet import data, network as net, optim

split = data.prepare("iris")
nets = {
    "plain": net.mlp(4, [16, 16, 16], 3, "relu", output_activation=True),
    "batchnorm": net.mlp(4, [16, 16, 16], 3, "relu", batchnorm=True, output_activation=True),
    "residual": net.residual_mlp(4, 16, 1, 3, "relu"),
}
for name, spec in nets.items():
    finals, lows = [], []
    for seed in range(3):
        log = optim.train(optim.TrainConfig(spec, split, budget=optim.iterations(500), seed=seed, metrics_every=500))
        finals.append(log.final("train_loss"))
        lows.append(log.column("grad_density").min())
    print(f"{name:>10}: final train loss {np.round(finals, 4)}, lowest density {np.round(lows, 2)}")
