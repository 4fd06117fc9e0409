"""Numerical kernels: Pfaffians, Haar-random rotations, canonical forms and
special functions used throughout the package.
"""
import math

import numpy as np
import scipy.linalg as sla
from scipy import special

from .errors import DimensionError, DomainError, InvalidCovarianceError

__all__ = [
    "as_antisymmetric",
    "check_special_orthogonal",
    "pfaffian",
    "pfaffian_batch",
    "haar_special_orthogonal",
    "haar_special_orthogonal_batch",
    "canonical_singular_values",
    "canonical_singular_values_batch",
    "digamma",
    "symmetric_beta_cdf",
    "symmetric_beta_cdf_integral",
    "symmetric_beta_quantile",
]

ANTISYMMETRY_TOL = 1e-12
ORTHOGONALITY_TOL = 1e-10
DETERMINANT_TOL = 1e-8
PFAFFIAN_PIVOT_TOL = 1e-14


def as_antisymmetric(a, tol=ANTISYMMETRY_TOL):
    """Validate a real antisymmetric matrix and return an exactly
    antisymmetric float copy.

    Parameters
    ----------
    a : array_like, shape (n, n)
    tol : float
        Maximum allowed ``|a + a.T|`` entry, relative to ``max(1, |a|_max)``.

    Raises
    ------
    DimensionError
        If ``a`` is not square.
    ValueError
        If ``a`` is not antisymmetric within ``tol``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.size:
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a + a.T)) > tol * scale:
            raise ValueError("matrix is not antisymmetric")
    return 0.5 * (a - a.T)


def check_special_orthogonal(r, tol=ORTHOGONALITY_TOL, det_tol=DETERMINANT_TOL):
    """Return ``r`` as a float array after checking ``r r^T = 1`` and ``det r = 1``."""
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {r.shape}")
    n = r.shape[0]
    if np.linalg.norm(r @ r.T - np.eye(n)) > tol:
        raise ValueError("matrix is not orthogonal")
    if abs(np.linalg.det(r) - 1.0) > det_tol:
        raise ValueError("matrix does not have unit determinant")
    return r


def pfaffian(a):
    """Pfaffian of a real antisymmetric matrix.

    Parlett-Reid tridiagonalisation with partial pivoting, O(n^3). A pivot
    smaller than ``1e-14 * max(1, |a|_max)`` makes the Pfaffian exactly 0.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Real antisymmetric matrix, ``n`` even.

    Returns
    -------
    float
        ``Pf(a)``; the empty matrix has Pfaffian 1.

    Examples
    --------
    >>> pfaffian([[0, 2.5], [-2.5, 0]])
    2.5
    """
    a = as_antisymmetric(a)
    n = a.shape[0]
    if n % 2:
        raise DimensionError(f"Pfaffian needs even dimension, got {n}")
    if n == 0:
        return 1.0
    thresh = PFAFFIAN_PIVOT_TOL * max(1.0, float(np.max(np.abs(a))))
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        pivot = a[k, k + 1]
        if abs(pivot) < thresh:
            return 0.0
        pf *= pivot
        if k + 2 < n:
            tau = a[k, k + 2:] / pivot
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def pfaffian_batch(a):
    """Vectorised :func:`pfaffian` over a stack of shape ``(..., n, n)``.

    The input is assumed antisymmetric; pivoting and the zero threshold are
    applied per matrix.
    """
    a = np.array(a, dtype=float)
    n = a.shape[-1]
    if a.shape[-2] != n:
        raise DimensionError(f"expected square matrices, got shape {a.shape}")
    if n % 2:
        raise DimensionError(f"Pfaffian needs even dimension, got {n}")
    lead = a.shape[:-2]
    if n == 0 or a.size == 0:
        return np.ones(lead)
    a = a.reshape((-1, n, n))
    b = a.shape[0]
    pf = np.ones(b)
    thresh = PFAFFIAN_PIVOT_TOL * np.maximum(1.0, np.max(np.abs(a), axis=(1, 2)))
    idx = np.arange(b)
    for k in range(0, n - 1, 2):
        kp = k + 1 + np.argmax(np.abs(a[:, k + 1:, k]), axis=1)
        swap = kp != k + 1
        if np.any(swap):
            rows = a[idx, kp, :].copy()
            a[idx, kp, :] = a[:, k + 1, :]
            a[:, k + 1, :] = rows
            cols = a[idx, :, kp].copy()
            a[idx, :, kp] = a[:, :, k + 1]
            a[:, :, k + 1] = cols
            pf[swap] = -pf[swap]
        pivot = a[:, k, k + 1].copy()
        dead = np.abs(pivot) < thresh
        pf = np.where(dead, 0.0, pf * pivot)
        pivot[dead] = 1.0
        if k + 2 < n:
            tau = a[:, k, k + 2:] / pivot[:, None]
            col = a[:, k + 2:, k + 1]
            a[:, k + 2:, k + 2:] += tau[:, :, None] * col[:, None, :] - col[:, :, None] * tau[:, None, :]
    return pf.reshape(lead)


def _haar_from_gaussian(z):
    # Mezzadri: fix the QR phase ambiguity, then move det=-1 samples to SO(n)
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    q = q * d[..., None, :]
    neg = np.linalg.det(q) < 0
    q[neg, :, 0] *= -1.0
    return q


def haar_special_orthogonal(n, rng):
    """Haar-random element of SO(n).

    Parameters
    ----------
    n : int
        Even dimension, at least 2.
    rng : numpy.random.Generator

    Returns
    -------
    ndarray, shape (n, n)
    """
    if n < 2 or n % 2:
        raise DimensionError(f"n must be even and >= 2, got {n}")
    z = rng.standard_normal((n, n))
    return _haar_from_gaussian(z[None])[0]


def haar_special_orthogonal_batch(n, size, rng):
    """``size`` independent Haar-random SO(n) matrices, shape ``(size, n, n)``.

    Uses the same construction as :func:`haar_special_orthogonal` on a stack
    of Gaussian matrices drawn in one call.
    """
    if n < 2 or n % 2:
        raise DimensionError(f"n must be even and >= 2, got {n}")
    z = rng.standard_normal((size, n, n))
    return _haar_from_gaussian(z)


def _check_norm(values, name="covariance matrix"):
    top = float(np.max(values)) if np.size(values) else 0.0
    if top > 1.0 + 1e-6:
        raise InvalidCovarianceError(
            f"{name} has singular value {top:.8g} > 1")


def canonical_singular_values(a, clip=True):
    """Canonical singular values of an antisymmetric matrix with norm <= 1.

    The eigenvalues of ``a`` come in pairs ``+-i s``; the ``n/2`` moduli are
    read off the 2x2 blocks of the real Schur form so the pairing is exact.

    Returns
    -------
    ndarray, shape (n/2,)
        Sorted descending and clipped into ``[0, 1]``.
    """
    a = as_antisymmetric(a)
    n = a.shape[0]
    if n % 2:
        raise DimensionError(f"need even dimension, got {n}")
    if n == 0:
        return np.zeros(0)
    t, _ = sla.schur(a, output="real")
    scale = max(1.0, float(np.max(np.abs(t))))
    pairs, singles = [], []
    i = 0
    while i < n:
        if i + 1 < n and abs(t[i + 1, i]) > 1e-14 * scale:
            pairs.append(math.sqrt(abs(t[i, i + 1] * t[i + 1, i])))
            i += 2
        else:
            singles.append(abs(t[i, i]))
            i += 1
    singles.sort(reverse=True)
    values = np.array(pairs + singles[::2])
    _check_norm(values)
    values = np.sort(values)[::-1]
    return np.clip(values, 0.0, 1.0) if clip else values


def canonical_singular_values_batch(gammas, clip=True):
    """Vectorised canonical singular values for a stack ``(..., n, n)``.

    Uses the Hermitian eigenproblem of ``i * gamma`` (eigenvalues ``+-s``),
    which batches well; descending, clipped into ``[0, 1]``.
    """
    gammas = np.asarray(gammas, dtype=float)
    n = gammas.shape[-1]
    if n == 2:
        s = np.abs(gammas[..., 0, 1])[..., None]
    else:
        ev = np.linalg.eigvalsh(1j * gammas)
        s = np.abs(ev[..., n // 2:][..., ::-1])
    _check_norm(s)
    return np.clip(s, 0.0, 1.0) if clip else s


# Bernoulli numbers B_2k / (2k) for the asymptotic digamma series
_DIGAMMA_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_DIGAMMA_SHIFT = 10.0


def digamma(z):
    """Digamma function for real ``z > 0``.

    Shifts the argument above 10, evaluates the asymptotic series
    ``log x - 1/(2x) - sum B_2k / (2k x^2k)`` and recurs back down with
    ``psi(x) = psi(x + 1) - 1/x``.
    """
    z = float(z)
    if not z > 0.0:
        raise DomainError(f"digamma needs z > 0, got {z}")
    shift = 0.0
    x = z
    while x < _DIGAMMA_SHIFT:
        shift += 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for c in _DIGAMMA_COEFFS:
        series += c * power
        power *= inv2
    return math.log(x) - 0.5 / x - series - shift


def _check_exponent(exponent):
    if exponent < 0 or int(exponent) != exponent:
        raise DomainError(f"exponent must be a non-negative integer, got {exponent}")
    return int(exponent)


def symmetric_beta_cdf(x, exponent):
    """CDF of the density proportional to ``(1 - u^2)^exponent`` on [-1, 1].

    Evaluated as ``1/2 + sign(x) I_{x^2}(1/2, exponent + 1) / 2`` with the
    regularised incomplete beta function ``I``. Vectorised over ``x``.
    """
    a = _check_exponent(exponent)
    x = np.asarray(x, dtype=float)
    if np.any((x < -1.0) | (x > 1.0)) or np.any(np.isnan(x)):
        raise DomainError("x must lie in [-1, 1]")
    val = 0.5 + 0.5 * np.sign(x) * special.betainc(0.5, a + 1.0, x * x)
    val = np.where(x == 1.0, 1.0, np.where(x == -1.0, 0.0, val))
    return float(val) if val.ndim == 0 else val


def symmetric_beta_cdf_integral(x, exponent):
    """``int_{-1}^x symmetric_beta_cdf(u) du`` in closed form (integration by parts)."""
    a = _check_exponent(exponent)
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    norm = special.beta(0.5, a + 1.0)
    val = x * symmetric_beta_cdf(x, a) + (1.0 - x * x) ** (a + 1) / (2.0 * (a + 1) * norm)
    return float(val) if np.ndim(val) == 0 else val


def symmetric_beta_quantile(c, exponent):
    """Inverse of :func:`symmetric_beta_cdf` for probabilities ``c`` in [0, 1]."""
    a = _check_exponent(exponent)
    c = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    v = special.betaincinv(0.5, a + 1.0, np.abs(2.0 * c - 1.0))
    val = np.sign(c - 0.5) * np.sqrt(v)
    return float(val) if val.ndim == 0 else val
