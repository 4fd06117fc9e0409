"""
Deep thermalization with a growing bath
=======================================

For Haar-random global states the projected ensemble on two modes gets
closer to the GHE as more bath modes are measured. We follow the element
<i gamma_1 gamma_2> and its Wasserstein-1 distance to the exact GHE law.
"""

from deepthermal.config import ExperimentConfig
from deepthermal.experiments import run_experiment

cfg = ExperimentConfig(experiment="w1-global", LA=2, LB_list=[4, 8, 16, 32],
                       R=1000, N=8, seed=3)
result = run_experiment(cfg)

for LB, w, se in zip(result.column("LB"), result.column("mean_w1"), result.column("se_w1")):
    print(f"LB = {LB:3d}   W1 = {w:.4f} +- {se:.4f}")

# a slope near -1/2 means W1 decays like 1/sqrt(LB)
fit = result.summary["slope_vs_LB_R1000"]
print(f"log-log slope: {fit['slope']:.2f} +- {fit['slope_stderr']:.2f}")
