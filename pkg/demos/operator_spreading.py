"""
Diffusive spreading in brickwork circuits
=========================================

Under random nearest-neighbour Gaussian gates a Majorana operator spreads
over the chain. Its weight profile p_x(t) stays normalized and its width
grows like the square root of time.
"""

import numpy as np

from deepthermal.config import ExperimentConfig
from deepthermal.experiments import run_experiment

cfg = ExperimentConfig(experiment="diffusion", L=64, t_max=128, N=5, seed=2)
result = run_experiment(cfg)

for t, sigma in zip(result.column("t"), result.column("sigma_x")):
    print(f"t = {t:4d}   sigma_x = {sigma:6.3f}")

print("largest normalization error:", result.summary["norm_max_dev"])
print("growth exponent:", round(result.summary["sigma_slope"]["slope"], 3))

# the profile at the last checkpoint, coarse-grained over blocks of 8 sites
cols, rows = result.extra_tables["px.csv"]
last = np.array([r[2] for r in rows if r[0] == result.column("t")[-1]])
print("block weights:", np.round(last.reshape(-1, 8).sum(axis=1), 3))
