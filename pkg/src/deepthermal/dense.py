"""Dense Fock-space simulation for small systems, used as an independent
check of the covariance-matrix routines.

Majoranas follow the Jordan-Wigner form
``gamma_{2j} = prod_{k<j}(-Z_k) X_j`` and ``gamma_{2j+1} = prod_{k<j}(-Z_k) Y_j``.
Basis states are labelled by Fock occupations ``m`` (mode 0 is the most
significant bit). Occupation 0 is the ``-1`` eigenstate of ``Z_j``, i.e. the
``+1`` eigenstate of ``i gamma_{2j} gamma_{2j+1}``, which makes the vacuum
covariance matrix equal to the ``[[0, 1], [-1, 0]]`` block form.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .errors import SizeError
from .gaussian_state import BrickworkCircuit, GateRecord

MAX_DENSE_MODES = 12

# Pauli matrices written in the occupation basis (|m=0>, |m=1>)
_X = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
_Y = sp.csr_matrix(np.array([[0.0, 1.0j], [-1.0j, 0.0]]))
_MZ = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex))  # -Z
_I = sp.identity(2, dtype=complex, format="csr")


@dataclass(frozen=True)
class DenseState:
    modes: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-12:
            raise ValueError("dense state is not normalised")


def _check_size(L):
    if L > MAX_DENSE_MODES:
        raise SizeError(f"dense oracle supports at most {MAX_DENSE_MODES} modes, got {L}")


@lru_cache(maxsize=None)
def majoranas(L):
    """Tuple of ``2L`` sparse Majorana matrices of size ``2^L``."""
    _check_size(L)
    ops = []
    for j in range(L):
        for local in (_X, _Y):
            factors = [_MZ] * j + [local] + [_I] * (L - j - 1)
            op = factors[0]
            for f in factors[1:]:
                op = sp.kron(op, f, format="csr")
            ops.append(op.tocsr())
    return tuple(ops)


def fock_vacuum(L):
    _check_size(L)
    psi = np.zeros(2 ** L, dtype=complex)
    psi[0] = 1.0
    return psi


def _generator(L, indices, w):
    gam = majoranas(L)
    h = sp.csr_matrix((2 ** L, 2 ** L), dtype=complex)
    for a, p in enumerate(indices):
        for b, q in enumerate(indices):
            if w[a, b] != 0.0:
                h = h + w[a, b] * (gam[p] @ gam[q])
    return 0.25 * h


def _log_rotation(r):
    w = sla.logm(r)
    w = np.real(w)
    w = 0.5 * (w - w.T)
    if np.linalg.norm(sla.expm(w) - r) > 1e-9:
        raise ValueError("rotation has no real antisymmetric logarithm")
    return w


def apply_rotation_dense(psi, L, rotation, indices=None):
    """Apply the Fock-space unitary of a rotation acting on ``indices``.

    The unitary is ``exp(1/4 sum_jk gamma_j W_jk gamma_k)`` with
    ``rotation = exp(W)``; with this sign the covariance matrix transforms
    as ``R Gamma R^T``.
    """
    if indices is None:
        indices = np.arange(2 * L)
    w = _log_rotation(np.asarray(rotation, dtype=float))
    h = _generator(L, list(indices), w)
    return expm_multiply(h, psi)


def dense_oracle_state(circuit, L=None):
    """Exact Fock-space state produced from the vacuum by ``circuit``.

    ``circuit`` is a :class:`BrickworkCircuit`, a list of :class:`GateRecord`,
    or a single ``2L x 2L`` rotation matrix.
    """
    if isinstance(circuit, BrickworkCircuit):
        L, gates = circuit.modes, circuit.gates
    elif isinstance(circuit, np.ndarray):
        L = circuit.shape[0] // 2
        gates = None
    else:
        gates = list(circuit)
        if L is None:
            raise ValueError("L is required for a bare gate list")
    _check_size(L)
    psi = fock_vacuum(L)
    if gates is None:
        psi = apply_rotation_dense(psi, L, circuit)
    else:
        for g in gates:
            j = g.pair[0] if isinstance(g, GateRecord) else g[0]
            mat = g.matrix if isinstance(g, GateRecord) else g[1]
            psi = apply_rotation_dense(psi, L, mat, range(2 * j, 2 * j + 4))
    psi = psi / np.linalg.norm(psi)
    return DenseState(L, psi)


def _amps(state):
    return state.amplitudes if isinstance(state, DenseState) else np.asarray(state)


def covariance_from_dense(state, L=None):
    """``Gamma_jk = (i/2) <[gamma_j, gamma_k]>`` from a dense state."""
    psi = _amps(state)
    L = L or int(round(np.log2(psi.size)))
    gam = majoranas(L)
    vecs = [g @ psi for g in gam]
    n = 2 * L
    out = np.zeros((n, n))
    for j in range(n):
        for k in range(j + 1, n):
            # <gamma_j gamma_k> is purely imaginary for j != k
            val = np.vdot(vecs[j], vecs[k])
            out[j, k] = np.real(1j * val)
            out[k, j] = -out[j, k]
    return out


def correlator_from_dense(state, indices, L=None):
    """``i^{n/2} <gamma_{j1} ... gamma_{jn}>`` for an even index list."""
    psi = _amps(state)
    L = L or int(round(np.log2(psi.size)))
    gam = majoranas(L)
    vec = psi
    for j in reversed(list(indices)):
        vec = gam[j] @ vec
    val = (1j ** (len(indices) // 2)) * np.vdot(psi, vec)
    return float(np.real(val))


def block_probabilities_dense(state, n_keep):
    """Born probabilities of all occupation strings on the last modes.

    Returns an array of length ``2^{L_B}`` indexed by the outcome bits with
    the first measured mode as the most significant bit.
    """
    psi = _amps(state)
    L = int(round(np.log2(psi.size)))
    mat = psi.reshape(2 ** n_keep, 2 ** (L - n_keep))
    return np.sum(np.abs(mat) ** 2, axis=0)


def conditional_state_dense(state, n_keep, outcome):
    """Normalised post-measurement state on the first ``n_keep`` modes."""
    psi = _amps(state)
    L = int(round(np.log2(psi.size)))
    mat = psi.reshape(2 ** n_keep, 2 ** (L - n_keep))
    col = int("".join(str(int(b)) for b in outcome), 2) if len(outcome) else 0
    vec = mat[:, col]
    return vec / np.linalg.norm(vec)


def single_mode_probability_dense(state, j, m):
    psi = _amps(state)
    L = int(round(np.log2(psi.size)))
    t = np.abs(psi.reshape((2,) * L)) ** 2
    return float(np.sum(np.take(t, m, axis=j)))


def single_mode_collapse_dense(state, j, m):
    """Full post-measurement state after finding occupation ``m`` on mode ``j``."""
    psi = _amps(state)
    L = int(round(np.log2(psi.size)))
    t = psi.reshape((2,) * L).copy()
    idx = [slice(None)] * L
    idx[j] = 1 - m
    t[tuple(idx)] = 0.0
    out = t.reshape(-1)
    return out / np.linalg.norm(out)


def reduced_density_matrix(state, n_keep):
    """Reduced density matrix of the first ``n_keep`` modes."""
    psi = _amps(state)
    L = int(round(np.log2(psi.size)))
    mat = psi.reshape(2 ** n_keep, 2 ** (L - n_keep))
    return mat @ mat.conj().T


def entropy_dense(state, n_keep, alpha=1.0):
    """von Neumann (``alpha == 1``) or Renyi entropy of the first ``n_keep`` modes."""
    ev = np.linalg.eigvalsh(reduced_density_matrix(state, n_keep))
    ev = ev[ev > 1e-15]
    if alpha == 1.0:
        return float(-np.sum(ev * np.log(ev)))
    return float(np.log(np.sum(ev ** alpha)) / (1.0 - alpha))


def expectation(state, op):
    psi = _amps(state)
    return complex(np.vdot(psi, op @ psi))
