"""
The Gaussian Haar ensemble and its element law
==============================================

Rotating the vacuum by a Haar-random special-orthogonal matrix gives the
Gaussian Haar ensemble (GHE). A single covariance-matrix element follows
a symmetric beta law whose shape depends on the number of modes.
"""

import numpy as np

from deepthermal import ghe_sample_batch, wasserstein1_vs_analytic
from deepthermal.observables import ghe_element_cdf, ghe_element_reference

rng = np.random.default_rng(4)
LA = 4
x = ghe_sample_batch(LA, 200_000, rng)[:, 0, 1]

# the law has parameter n = LA - 1
ref = ghe_element_reference(LA - 1)
for q in (-0.5, 0.0, 0.5):
    print(f"P(x <= {q:+.1f}): empirical {np.mean(x <= q):.4f}, "
          f"analytic {ghe_element_cdf(q, LA - 1):.4f}")

# distance between the sample and the exact law shrinks as the sample grows
for size in (1_000, 10_000, 100_000):
    print(size, "samples: W1 =", f"{wasserstein1_vs_analytic(x[:size], ref):.2e}")
