"""Covariance-matrix representation of fermionic Gaussian states and their
evolution under global rotations and local brickwork circuits.

Majorana modes are indexed from 0: mode ``j`` owns Majoranas ``2j`` and
``2j + 1``. The vacuum covariance matrix is the direct sum of
``[[0, 1], [-1, 0]]`` blocks.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidCovarianceError
from .numerics import (
    as_antisymmetric,
    canonical_singular_values,
    check_special_orthogonal,
    haar_special_orthogonal_batch,
)

__all__ = [
    "CovarianceMatrix",
    "GateRecord",
    "BrickworkCircuit",
    "BrickworkEvolution",
    "vacuum",
    "vacuum_matrix",
    "apply_rotation",
    "apply_local_gate",
    "embed_local_gate",
    "run_brickwork",
    "global_random_state",
    "subsystem_block",
    "majorana_indices",
]

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
NORM_TOL = 1e-8
PURITY_TOL = 1e-8


def vacuum_matrix(L):
    """Vacuum covariance matrix as a plain ``(2L, 2L)`` array."""
    return np.kron(np.eye(L), J2)


def majorana_indices(modes):
    """Majorana indices ``[2j, 2j + 1, ...]`` of an ordered list of modes."""
    modes = np.asarray(modes, dtype=int).reshape(-1)
    return np.stack([2 * modes, 2 * modes + 1], axis=1).reshape(-1)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Immutable snapshot of a Gaussian state's covariance matrix.

    ``gamma`` is real antisymmetric of shape ``(2L, 2L)`` with operator norm
    at most 1. The state is pure when ``gamma @ gamma == -1``.
    """

    gamma: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        if self.validate:
            g = as_antisymmetric(g)
            if g.shape[0] % 2:
                raise DimensionError("covariance matrix must have even dimension")
            if g.size and np.linalg.norm(g, 2) > 1.0 + NORM_TOL:
                raise InvalidCovarianceError("operator norm exceeds 1")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @classmethod
    def _trusted(cls, gamma):
        return cls(gamma, validate=False)

    @property
    def modes(self):
        return self.gamma.shape[0] // 2

    def purity_defect(self):
        """Frobenius norm of ``gamma^2 + 1``."""
        n = self.gamma.shape[0]
        return float(np.linalg.norm(self.gamma @ self.gamma + np.eye(n)))

    @property
    def is_pure(self):
        return self.purity_defect() <= PURITY_TOL * max(1, self.gamma.shape[0])

    def singular_values(self):
        return canonical_singular_values(self.gamma)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.gamma, dtype=dtype)


def vacuum(L):
    """Covariance matrix of the Fock vacuum on ``L`` modes."""
    if L < 1:
        raise ValueError("L must be positive")
    return CovarianceMatrix._trusted(vacuum_matrix(L))


def _gamma(state):
    return state.gamma if isinstance(state, CovarianceMatrix) else as_antisymmetric(state)


def apply_rotation(state, rotation):
    """Return ``R Gamma R^T`` for a rotation ``R`` in SO(2L)."""
    g = _gamma(state)
    r = np.asarray(rotation, dtype=float)
    if r.shape != g.shape:
        raise DimensionError(f"rotation shape {r.shape} does not match state {g.shape}")
    check_special_orthogonal(r)
    out = r @ g @ r.T
    return CovarianceMatrix._trusted(0.5 * (out - out.T))


def embed_local_gate(L, j, gate):
    """Full ``2L x 2L`` rotation acting as ``gate`` on modes ``(j, j + 1)``."""
    if not 0 <= j < L - 1:
        raise IndexError(f"gate position {j} out of range for L={L}")
    r = np.eye(2 * L)
    r[2 * j:2 * j + 4, 2 * j:2 * j + 4] = gate
    return r


def _gate_inplace(g, j, gate):
    # rank-4 row/column update of G g G^T, kept exactly antisymmetric
    sl = slice(2 * j, 2 * j + 4)
    rows = gate @ g[sl, :]
    g[sl, :] = rows
    g[:, sl] = -rows.T
    block = rows[:, sl] @ gate.T
    g[sl, sl] = 0.5 * (block - block.T)


def apply_local_gate(state, j, gate):
    """Apply an SO(4) gate to neighbouring modes ``(j, j + 1)``.

    Equivalent to :func:`apply_rotation` with :func:`embed_local_gate`, but
    touches only four rows and columns.
    """
    g = np.array(_gamma(state))
    L = g.shape[0] // 2
    if not 0 <= j < L - 1:
        raise IndexError(f"gate position {j} out of range for L={L}")
    gate = np.asarray(gate, dtype=float)
    if gate.shape != (4, 4):
        raise DimensionError("local gates must be 4x4")
    _gate_inplace(g, j, gate)
    return CovarianceMatrix._trusted(g)


def subsystem_block(state, modes):
    """Reduced covariance matrix on an ordered set of modes."""
    g = _gamma(state)
    L = g.shape[0] // 2
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise IndexError("duplicate mode in subsystem")
    if any(m < 0 or m >= L for m in modes):
        raise IndexError(f"mode index out of range for L={L}")
    idx = majorana_indices(modes)
    return CovarianceMatrix._trusted(g[np.ix_(idx, idx)])


def global_random_state(L, rng):
    """Vacuum rotated by a Haar-random element of SO(2L); returns ``(state, O)``."""
    o = haar_special_orthogonal_batch(2 * L, 1, rng)[0]
    return apply_rotation(vacuum(L), o), o


@dataclass(frozen=True)
class GateRecord:
    layer: int
    pair: tuple
    matrix: np.ndarray

    def to_json(self):
        return {"layer": self.layer, "pair": list(self.pair),
                "matrix": [list(map(float, row)) for row in self.matrix]}


@dataclass
class BrickworkCircuit:
    """Gate log of an open-boundary brickwork circuit.

    Layer ``2s`` of time step ``s`` couples pairs ``(0,1), (2,3), ...``;
    layer ``2s + 1`` couples ``(1,2), (3,4), ...``.
    """

    modes: int
    depth: int = 0
    gates: list = field(default_factory=list)

    def rotation(self):
        r = np.eye(2 * self.modes)
        for gate in self.gates:
            j = gate.pair[0]
            r[2 * j:2 * j + 4, :] = gate.matrix @ r[2 * j:2 * j + 4, :]
        return r

    def dumps(self):
        return json.dumps([g.to_json() for g in self.gates])

    @classmethod
    def loads(cls, text, modes, depth=None):
        gates = [GateRecord(d["layer"], tuple(d["pair"]), np.array(d["matrix"], dtype=float))
                 for d in json.loads(text)]
        if depth is None:
            depth = (max((g.layer for g in gates), default=-1) + 2) // 2
        return cls(modes, depth, gates)


def layer_pairs(L, parity):
    return list(range(parity, L - 1, 2))


class BrickworkEvolution:
    """Mutable driver that advances a state through brickwork time steps.

    Parameters
    ----------
    L : int
        Number of modes, at least 2.
    rng : numpy.random.Generator
        Source of the Haar SO(4) gates, drawn one layer at a time.
    track_rotation : bool
        Also accumulate the composed rotation ``R(t)``.
    track_state : bool
        Evolve the covariance matrix (can be disabled when only ``R(t)``
        is needed).
    record : bool
        Keep a :class:`BrickworkCircuit` gate log.
    """

    def __init__(self, L, rng, track_rotation=True, track_state=True, record=False,
                 initial=None):
        if L < 2:
            raise ValueError("brickwork circuits need L >= 2")
        self.L = L
        self.rng = rng
        self.t = 0
        self.gamma = None
        if track_state:
            self.gamma = vacuum_matrix(L) if initial is None else np.array(_gamma(initial))
        self.rotation = np.eye(2 * L) if track_rotation else None
        self.circuit = BrickworkCircuit(L) if record else None

    def _layer(self, parity):
        pairs = layer_pairs(self.L, parity)
        if not pairs:
            return
        gates = haar_special_orthogonal_batch(4, len(pairs), self.rng)
        # gates of one layer act on disjoint contiguous 4-blocks of Majoranas
        lo, hi, ng = 2 * parity, 2 * parity + 4 * len(pairs), len(pairs)
        if self.gamma is not None:
            g = self.gamma
            g[lo:hi, :] = np.matmul(gates, g[lo:hi, :].reshape(ng, 4, -1)).reshape(hi - lo, -1)
            cols = g[:, lo:hi].reshape(-1, ng, 4).transpose(1, 0, 2)
            g[:, lo:hi] = np.matmul(cols, gates.transpose(0, 2, 1)).transpose(1, 0, 2).reshape(-1, hi - lo)
            self.gamma = 0.5 * (g - g.T)
        if self.rotation is not None:
            r = self.rotation
            r[lo:hi, :] = np.matmul(gates, r[lo:hi, :].reshape(ng, 4, -1)).reshape(hi - lo, -1)
        if self.circuit is not None:
            layer = 2 * self.t + parity
            self.circuit.gates.extend(GateRecord(layer, (j, j + 1), gate)
                                      for j, gate in zip(pairs, gates))

    def step(self, n=1):
        for _ in range(n):
            self._layer(0)
            self._layer(1)
            self.t += 1
            if self.rotation is not None:
                defect = np.linalg.norm(self.rotation @ self.rotation.T - np.eye(2 * self.L))
                if defect > 1e-10:
                    q, r = np.linalg.qr(self.rotation)
                    self.rotation = q * np.sign(np.diag(r))
        if self.circuit is not None:
            self.circuit.depth = self.t
        return self

    def advance_to(self, t):
        if t < self.t:
            raise ValueError(f"cannot go back from t={self.t} to t={t}")
        return self.step(t - self.t)

    def state(self):
        return CovarianceMatrix._trusted(self.gamma.copy())


def run_brickwork(L, t, rng, record=False):
    """Evolve the vacuum through ``t`` brickwork time steps.

    Returns
    -------
    state : CovarianceMatrix
    rotation : ndarray, shape (2L, 2L)
        Accumulated rotation ``R(t)``, so that ``state = R Gamma_0 R^T``.
    circuit : BrickworkCircuit, only when ``record`` is true
    """
    evo = BrickworkEvolution(L, rng, track_rotation=True, record=record).step(t)
    if record:
        return evo.state(), evo.rotation.copy(), evo.circuit
    return evo.state(), evo.rotation.copy()

