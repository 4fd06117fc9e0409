"""
Measuring part of a fermionic Gaussian state
============================================

A pure Gaussian state on L modes is stored as its 2L x 2L covariance
matrix. Measuring the occupations of the last L_B modes leaves a pure
Gaussian state on the first L_A modes, one per outcome string.
"""

import numpy as np

from deepthermal import build_projected_ensemble, global_random_state, vacuum
from deepthermal import dense
from deepthermal.measurement import single_mode_probability

rng = np.random.default_rng(1)

# the vacuum is empty: every mode reads 0 with certainty
print("vacuum, P(n_0 = 0) =", single_mode_probability(vacuum(3), 0, 0))

# a Haar-random Gaussian state on 5 modes
state, rotation = global_random_state(5, rng)
print("pure:", np.allclose(state.gamma @ state.gamma, -np.eye(10)))

# keep 2 modes, measure the other 3: 2^3 outcome strings
ens = build_projected_ensemble(state, 2, mode="exhaustive")
for m, p in zip(ens.outcomes, ens.probabilities):
    print("outcome", "".join(map(str, m)), "p =", round(float(p), 4))
print("sum of probabilities:", ens.probabilities.sum())

# the same numbers from a brute-force state vector on 2^5 amplitudes
psi = dense.dense_oracle_state(rotation)
print("dense check:", np.allclose(sorted(ens.probabilities),
                                  sorted(dense.block_probabilities_dense(psi, 2))))

# averaging the post-measurement states returns the reduced state of A
mean = np.einsum("k,kij->ij", ens.weights, ens.gammas)
print("first moment = reduced state:", np.allclose(mean, state.gamma[:4, :4]))
