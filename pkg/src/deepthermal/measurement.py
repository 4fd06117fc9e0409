"""Fock-basis measurements of Gaussian states and projected ensembles.

A partition is given either as an integer ``n_a`` (subsystem A is the first
``n_a`` modes, B the rest) or as an explicit sequence of A modes, in which
case B is every other mode in increasing order. Outcome strings are always
ordered like the B modes.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CollapseUndefinedError,
    DimensionError,
    NumericalConsistencyError,
    SizeError,
)
from .gaussian_state import J2, CovarianceMatrix, majorana_indices

__all__ = [
    "MeasurementRecord",
    "ProjectedEnsemble",
    "single_mode_probability",
    "single_mode_collapse",
    "block_probability",
    "block_collapse",
    "sample_outcome",
    "sample_outcomes",
    "enumerate_outcomes",
    "build_projected_ensemble",
    "split_partition",
]

ZERO_PROB = 1e-12
MAX_EXHAUSTIVE_MODES = 20
_CHUNK_ENTRIES = 600_000


def _as_gamma(state):
    if isinstance(state, CovarianceMatrix):
        return state.gamma
    return np.asarray(state, dtype=float)


def split_partition(L, partition):
    """Return ``(a_modes, b_modes)`` for a partition spec on ``L`` modes."""
    if np.isscalar(partition):
        n_a = int(partition)
        if not 0 <= n_a <= L:
            raise DimensionError(f"subsystem size {n_a} out of range for L={L}")
        return list(range(n_a)), list(range(n_a, L))
    a_modes = [int(m) for m in partition]
    if len(set(a_modes)) != len(a_modes) or any(not 0 <= m < L for m in a_modes):
        raise DimensionError("invalid subsystem modes")
    b_modes = [m for m in range(L) if m not in set(a_modes)]
    return a_modes, b_modes


def _ordered(state, partition):
    g = _as_gamma(state)
    L = g.shape[0] // 2
    a_modes, b_modes = split_partition(L, partition)
    if a_modes == list(range(len(a_modes))):
        return g, len(a_modes)
    idx = majorana_indices(a_modes + b_modes)
    return g[np.ix_(idx, idx)], len(a_modes)


def _sqrt_det(mat):
    det = float(np.linalg.det(mat))
    if det < -1e-9:
        raise NumericalConsistencyError(f"negative determinant {det:.3e} in Born rule")
    return np.sqrt(max(det, 0.0))


def _k_matrix(L, j, m):
    k = np.zeros((2 * L, 2 * L))
    k[2 * j:2 * j + 2, 2 * j:2 * j + 2] = (-1) ** m * J2
    return k


def single_mode_probability(state, j, m):
    """Probability of occupation ``m`` on mode ``j``: ``sqrt(det(1 - K Gamma)) / 2``."""
    g = _as_gamma(state)
    L = g.shape[0] // 2
    if not 0 <= j < L:
        raise IndexError(f"mode {j} out of range for L={L}")
    if m not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    return 0.5 * _sqrt_det(np.eye(2 * L) - _k_matrix(L, j, m) @ g)


def single_mode_collapse(state, j, m):
    """Full-system covariance matrix after finding occupation ``m`` on mode ``j``.

    ``Gamma_m = K + D (1 - Gamma K)^{-1} Gamma D`` where ``D`` projects onto
    the Majoranas of every mode except ``j``.
    """
    g = _as_gamma(state)
    L = g.shape[0] // 2
    if single_mode_probability(g, j, m) <= ZERO_PROB:
        raise CollapseUndefinedError(f"outcome {m} on mode {j} has zero probability")
    k = _k_matrix(L, j, m)
    d = np.eye(2 * L)
    d[2 * j, 2 * j] = d[2 * j + 1, 2 * j + 1] = 0.0
    out = k + d @ np.linalg.solve(np.eye(2 * L) - g @ k, g) @ d
    return CovarianceMatrix._trusted(0.5 * (out - out.T))


def _kappa(outcome):
    outcome = np.asarray(outcome, dtype=int).reshape(-1)
    return np.kron(np.diag((-1.0) ** outcome), J2)


def block_probability(state, partition, outcome):
    """Born probability ``2^{-L_B} sqrt(det(1 - kappa_m Gamma^B))`` of a full
    outcome string on B."""
    g, n_a = _ordered(state, partition)
    nb = g.shape[0] // 2 - n_a
    outcome = np.asarray(outcome, dtype=int).reshape(-1)
    if outcome.size != nb:
        raise DimensionError(f"outcome has length {outcome.size}, expected {nb}")
    gb = g[2 * n_a:, 2 * n_a:]
    return _sqrt_det(np.eye(2 * nb) - _kappa(outcome) @ gb) / 2.0 ** nb


def block_collapse(state, partition, outcome):
    """Pure post-measurement covariance matrix on A given outcome string ``m``.

    ``Gamma^A_m = Gamma^A + Gamma^{AB} kappa_m (1 - Gamma^B kappa_m)^{-1} Gamma^{BA}``.
    """
    g, n_a = _ordered(state, partition)
    nb = g.shape[0] // 2 - n_a
    if block_probability(g, n_a, outcome) <= ZERO_PROB:
        raise CollapseUndefinedError(f"outcome {list(outcome)} has zero probability")
    ga = g[:2 * n_a, :2 * n_a]
    gab = g[:2 * n_a, 2 * n_a:]
    gb = g[2 * n_a:, 2 * n_a:]
    kap = _kappa(outcome)
    try:
        inner = np.linalg.solve(np.eye(2 * nb) - gb @ kap, gab.T)
    except np.linalg.LinAlgError as exc:
        raise NumericalConsistencyError("singular update in block collapse") from exc
    out = ga - gab @ kap @ inner
    return CovarianceMatrix._trusted(0.5 * (out - out.T))


def _measure_last(g, m):
    """Measure the last mode of every matrix in the stack ``g``.

    Returns the conditional probabilities and the stack reduced to the
    remaining modes. Uses the 2x2 closed form of the blocked formulas:
    ``p = (1 + s g_{n-2,n-1}) / 2`` and a rank-2 update, ``s = (-1)^m``.
    """
    n = g.shape[-1]
    top = g[:, n - 2, n - 1]
    if np.any(np.abs(top) > 1.0 + 1e-8):
        raise NumericalConsistencyError("conditional probabilities do not sum to one")
    s = 1.0 - 2.0 * m
    p = 0.5 * (1.0 + s * top)
    u = g[:, :n - 2, n - 2]
    v = g[:, :n - 2, n - 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        c = s / (2.0 * p)
    rest = g[:, :n - 2, :n - 2] - c[:, None, None] * (
        u[:, :, None] * v[:, None, :] - v[:, :, None] * u[:, None, :])
    return p, rest


def _chunks(total, n):
    size = max(1, _CHUNK_ENTRIES // max(1, n * n))
    for start in range(0, total, size):
        yield start, min(total, start + size)


def sample_outcomes(state, partition, shots, rng=None, uniforms=None):
    """Draw ``shots`` i.i.d. outcome strings by chaining single-mode conditionals.

    B modes are measured from the last one backwards so that the stored
    matrix only ever holds the not-yet-measured modes. Shot ``s`` consumes
    row ``s`` of a ``(shots, L_B)`` table of uniforms.

    Returns
    -------
    outcomes : ndarray of int8, shape (shots, L_B)
    probabilities : ndarray, shape (shots,)
        ``p_m`` as the product of the conditionals along the chain.
    gammas : ndarray, shape (shots, 2 L_A, 2 L_A)
    """
    g, n_a = _ordered(state, partition)
    nb = g.shape[0] // 2 - n_a
    if uniforms is None:
        uniforms = rng.random((shots, nb))
    uniforms = np.asarray(uniforms, dtype=float)
    if uniforms.shape != (shots, nb):
        raise DimensionError("uniform table must have shape (shots, L_B)")
    outcomes = np.zeros((shots, nb), dtype=np.int8)
    probs = np.ones(shots)
    gammas = np.empty((shots, 2 * n_a, 2 * n_a))
    flip = np.array([1.0, -1.0])
    for lo, hi in _chunks(shots, g.shape[0]):
        # work in place on the leading block of a per-chunk buffer
        buf = np.repeat(g[None], hi - lo, axis=0)
        pr = np.ones(hi - lo)
        for b in range(nb - 1, -1, -1):
            n = 2 * (n_a + b + 1)
            top = buf[:, n - 2, n - 1]
            if np.any(np.abs(top) > 1.0 + 1e-8):
                raise NumericalConsistencyError("conditional probabilities do not sum to one")
            p0 = 0.5 * (1.0 + top)
            p0 = np.where(p0 <= ZERO_PROB, 0.0, np.where(p0 >= 1.0 - ZERO_PROB, 1.0, p0))
            m = uniforms[lo:hi, b] >= p0
            s = np.where(m, -1.0, 1.0)
            p = 0.5 * (1.0 + s * top)
            # rank-2 update: rest -= c (u v^T - v u^T), c = s / (2 p)
            uv = buf[:, :n - 2, n - 2:n].copy()
            wt = uv[:, :, ::-1] * flip * (s / (2.0 * p))[:, None, None]
            buf[:, :n - 2, :n - 2] -= np.matmul(uv, wt.transpose(0, 2, 1))
            outcomes[lo:hi, b] = m
            pr *= p
        probs[lo:hi] = pr
        sub = buf[:, :2 * n_a, :2 * n_a]
        gammas[lo:hi] = 0.5 * (sub - sub.transpose(0, 2, 1))
    return outcomes, probs, gammas


def enumerate_outcomes(state, partition):
    """All outcome strings with non-zero probability, by breadth-first
    branching over the single-mode chain.

    Branches whose conditional probability is at most ``1e-12`` are dropped.
    Returns arrays like :func:`sample_outcomes`.
    """
    g, n_a = _ordered(state, partition)
    nb = g.shape[0] // 2 - n_a
    if nb > MAX_EXHAUSTIVE_MODES:
        raise SizeError(f"exhaustive enumeration limited to {MAX_EXHAUSTIVE_MODES} "
                        f"measured modes, got {nb}")
    cur = g[None].copy()
    probs = np.ones(1)
    outcomes = np.zeros((1, nb), dtype=np.int8)
    for b in range(nb - 1, -1, -1):
        n = cur.shape[-1]
        top = cur[:, n - 2, n - 1]
        p0 = 0.5 * (1.0 + top)
        keep0 = p0 > ZERO_PROB
        keep1 = (1.0 - p0) > ZERO_PROB
        src = np.concatenate([np.flatnonzero(keep0), np.flatnonzero(keep1)])
        m = np.concatenate([np.zeros(keep0.sum(), np.int8), np.ones(keep1.sum(), np.int8)])
        order = np.argsort(src, kind="stable")
        src, m = src[order], m[order]
        p, cur = _measure_last(cur[src], m)
        probs = probs[src] * p
        outcomes = outcomes[src]
        outcomes[:, b] = m
    return outcomes, probs, cur


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: tuple
    probability: float
    post_state: CovarianceMatrix


@dataclass
class ProjectedEnsemble:
    """Post-measurement covariance matrices on A with their Born weights.

    ``mode`` is ``"exhaustive"`` (every outcome, weighted by ``p_m``) or
    ``"sampled"`` (i.i.d. shots, uniform weights).
    """

    outcomes: np.ndarray
    probabilities: np.ndarray
    gammas: np.ndarray
    mode: str
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.probabilities)

    @property
    def n_a(self):
        return self.gammas.shape[-1] // 2

    @property
    def weights(self):
        if self.mode == "exhaustive":
            return self.probabilities / np.sum(self.probabilities)
        return np.full(len(self), 1.0 / len(self))

    @property
    def records(self):
        return [MeasurementRecord(tuple(int(b) for b in m), float(p), CovarianceMatrix._trusted(g))
                for m, p, g in zip(self.outcomes, self.probabilities, self.gammas)]

    def to_dict(self):
        return {
            **self.metadata,
            "mode": self.mode,
            "n_a": self.n_a,
            "records": [
                {"m": [int(b) for b in m], "p": float(p), "gamma": [float(x) for x in g.ravel()]}
                for m, p, g in zip(self.outcomes, self.probabilities, self.gammas)
            ],
        }

    def dumps(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        records = data.pop("records")
        mode = data.pop("mode")
        n_a = data.pop("n_a")
        dim = 2 * n_a
        outcomes = np.array([r["m"] for r in records], dtype=np.int8).reshape(len(records), -1)
        probs = np.array([r["p"] for r in records], dtype=float)
        gammas = np.array([r["gamma"] for r in records], dtype=float).reshape(-1, dim, dim)
        return cls(outcomes, probs, gammas, mode, data)

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))

    def save_npz(self, path):
        np.savez(path, outcomes=self.outcomes, probabilities=self.probabilities,
                 gammas=self.gammas, mode=self.mode, metadata=json.dumps(self.metadata))

    @classmethod
    def load_npz(cls, path):
        with np.load(path) as f:
            return cls(f["outcomes"], f["probabilities"], f["gammas"], str(f["mode"]),
                       json.loads(str(f["metadata"])))


def sample_outcome(state, partition, rng):
    """Draw one :class:`MeasurementRecord` via the conditional chain."""
    outcomes, probs, gammas = sample_outcomes(state, partition, 1, rng)
    return MeasurementRecord(tuple(int(b) for b in outcomes[0]), float(probs[0]),
                             CovarianceMatrix._trusted(gammas[0]))


def build_projected_ensemble(state, partition, mode="exhaustive", shots=None, rng=None,
                             uniforms=None, metadata=None):
    """Construct the projected ensemble on A.

    Parameters
    ----------
    mode : {"exhaustive", "sampled"}
    shots : int
        Number of i.i.d. records for ``mode="sampled"``.
    """
    if mode == "exhaustive":
        outcomes, probs, gammas = enumerate_outcomes(state, partition)
        if abs(np.sum(probs) - 1.0) > 1e-9:
            raise NumericalConsistencyError(f"probabilities sum to {np.sum(probs)!r}")
    elif mode == "sampled":
        if shots is None or shots < 1:
            raise ValueError("sampled mode needs shots >= 1")
        outcomes, probs, gammas = sample_outcomes(state, partition, shots, rng, uniforms)
    else:
        raise ValueError(f"unknown ensemble mode {mode!r}")
    return ProjectedEnsemble(outcomes, probs, gammas, mode, dict(metadata or {}))
