"""Gaussian Haar ensemble, scalar observables of covariance matrices and
their analytic reference laws.

Library functions take 0-based Majorana and mode indices. The string
identifiers of :func:`parse_observable` (used by the command line) are
1-based: ``"corr:1,2"`` is ``Gamma[0, 1]``.
"""
import logging
import math
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from .errors import DomainError, InvalidCovarianceError, ParityError
from .gaussian_state import CovarianceMatrix, majorana_indices, vacuum_matrix
from .numerics import (
    canonical_singular_values_batch,
    digamma,
    haar_special_orthogonal_batch,
    pfaffian,
    pfaffian_batch,
    symmetric_beta_cdf,
    symmetric_beta_cdf_integral,
    symmetric_beta_quantile,
)

log = logging.getLogger(__name__)

__all__ = [
    "GheSpec",
    "ghe_sample",
    "ghe_sample_batch",
    "correlator_element",
    "npoint_correlator",
    "von_neumann_entropy",
    "renyi_entropy",
    "entropy_from_singular_values",
    "ghe_element_pdf",
    "ghe_element_cdf",
    "ghe_element_reference",
    "singular_value_joint_pdf",
    "page_mean",
    "page_variance_limit",
    "ObservableFunction",
    "AnalyticCDF",
    "parse_observable",
]

CLIP_LOG_THRESHOLD = 1e-10
_GHE_CHUNK = 65536


def _as_gamma(state):
    if isinstance(state, CovarianceMatrix):
        return state.gamma
    return np.asarray(state, dtype=float)


@dataclass(frozen=True)
class GheSpec:
    """Gaussian Haar ensemble on ``modes`` modes."""

    modes: int

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError("the GHE needs at least one mode")


def _modes(spec):
    return spec.modes if isinstance(spec, GheSpec) else GheSpec(int(spec)).modes


def ghe_sample_batch(spec, size, rng):
    """``size`` GHE covariance matrices ``O Gamma_0 O^T`` as one array.

    Uses ``Gamma_0 = sum_k (e_{2k} e_{2k+1}^T - e_{2k+1} e_{2k}^T)`` so that
    ``O Gamma_0 O^T = sum_k (o_{2k} o_{2k+1}^T - o_{2k+1} o_{2k}^T)`` with the
    columns ``o`` of ``O``.
    """
    n = 2 * _modes(spec)
    out = np.empty((size, n, n))
    for lo in range(0, size, _GHE_CHUNK):
        hi = min(size, lo + _GHE_CHUNK)
        o = haar_special_orthogonal_batch(n, hi - lo, rng)
        even, odd = o[:, :, 0::2], o[:, :, 1::2]
        prod = np.matmul(even, odd.transpose(0, 2, 1))
        out[lo:hi] = prod - prod.transpose(0, 2, 1)
    return out


def ghe_sample(spec, rng):
    """One GHE covariance matrix ``O Gamma_0 O^T``, ``O`` Haar on SO(2 L_A)."""
    return CovarianceMatrix._trusted(ghe_sample_batch(spec, 1, rng)[0])


def correlator_element(gamma, i, j):
    """``Gamma[i, j] = <i gamma_i gamma_j>`` for ``i != j``."""
    g = _as_gamma(gamma)
    if i == j:
        raise DomainError("diagonal correlators vanish identically")
    return float(g[..., i, j]) if g.ndim == 2 else g[..., i, j]


def npoint_correlator(gamma, indices):
    """``i^{n/2} <gamma_{i_1} ... gamma_{i_n}>`` as the Pfaffian of ``Gamma`` restricted to ``indices``.

    Accepts a single matrix or a stack; the order of ``indices`` fixes the sign.
    """
    idx = [int(i) for i in indices]
    if len(idx) % 2:
        raise ParityError(f"need an even number of Majoranas, got {len(idx)}")
    if len(set(idx)) != len(idx):
        raise ValueError("Majorana indices must be distinct")
    g = _as_gamma(gamma)
    sub = g[..., idx, :][..., :, idx]
    if g.ndim == 2:
        return pfaffian(sub)
    return pfaffian_batch(sub)


def _clipped_values(g):
    s = canonical_singular_values_batch(g, clip=False)
    excess = float(np.max(s, initial=0.0)) - 1.0
    if excess > CLIP_LOG_THRESHOLD:
        log.info("clipping singular values exceeding 1 by %.3e", excess)
    return np.clip(s, 0.0, 1.0)


def _binary_entropy(s):
    lo, hi = 0.5 * (1.0 - s), 0.5 * (1.0 + s)
    return -(special.xlogy(lo, lo) + special.xlogy(hi, hi))


def entropy_from_singular_values(s, alpha=1.0):
    """Entropy in nats from canonical singular values along the last axis.

    ``alpha=1`` selects the von Neumann formula explicitly.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s > 1.0 + 1e-6):
        raise InvalidCovarianceError("singular value exceeds 1")
    s = np.clip(s, 0.0, 1.0)
    if alpha == 1.0:
        return np.sum(_binary_entropy(s), axis=-1)
    lo, hi = 0.5 * (1.0 - s), 0.5 * (1.0 + s)
    return np.sum(np.log(hi ** alpha + lo ** alpha), axis=-1) / (1.0 - alpha)


def _entropy(gamma, modes, alpha):
    g = _as_gamma(gamma)
    if modes is not None:
        idx = majorana_indices(modes)
        g = g[..., idx, :][..., :, idx]
    val = entropy_from_singular_values(_clipped_values(g), alpha)
    return float(val) if np.ndim(val) == 0 else val


def von_neumann_entropy(gamma, modes=None):
    """von Neumann entropy (nats) of the state restricted to ``modes``.

    Parameters
    ----------
    gamma : CovarianceMatrix or array_like, shape (..., 2L, 2L)
    modes : sequence of int, optional
        Subsystem; the whole matrix when omitted.
    """
    return _entropy(gamma, modes, 1.0)


def renyi_entropy(gamma, alpha, modes=None):
    """Renyi-``alpha`` entropy (nats); ``alpha = 1`` must use :func:`von_neumann_entropy`."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if alpha == 1:
        raise DomainError("alpha = 1 is the von Neumann entropy; call von_neumann_entropy")
    return _entropy(gamma, modes, float(alpha))


def _check_n(n):
    if n < 1 or int(n) != n:
        raise DomainError(f"mode count must be a positive integer, got {n}")
    return int(n)


def ghe_element_pdf(x, n):
    """Density ``(1 - x^2)^(n-1) / B(1/2, n)`` of an off-diagonal CM element.

    ``n`` is the number of other modes the element's mode is entangled with:
    ``n = L_A - 1`` for the GHE on ``L_A`` modes.
    """
    n = _check_n(n)
    x = np.asarray(x, dtype=float)
    val = np.where(np.abs(x) <= 1.0, (1.0 - np.minimum(x * x, 1.0)) ** (n - 1), 0.0)
    val = val / special.beta(0.5, n)
    return float(val) if val.ndim == 0 else val


def ghe_element_cdf(x, n):
    """CDF matching :func:`ghe_element_pdf`."""
    return symmetric_beta_cdf(x, _check_n(n) - 1)


@dataclass(frozen=True)
class AnalyticCDF:
    """Continuous reference CDF on ``[a, b]`` with optional closed forms.

    ``integral(x)`` is ``int_a^x cdf`` and ``quantile`` its inverse; both
    are used for exact Wasserstein integration when present.
    """

    cdf: Callable
    support: tuple
    integral: Optional[Callable] = None
    quantile: Optional[Callable] = None
    label: str = ""


def ghe_element_reference(n):
    """:class:`AnalyticCDF` of a GHE CM element with parameter ``n``."""
    n = _check_n(n)
    return AnalyticCDF(
        cdf=lambda x: symmetric_beta_cdf(x, n - 1),
        support=(-1.0, 1.0),
        integral=lambda x: symmetric_beta_cdf_integral(x, n - 1),
        quantile=lambda c: symmetric_beta_quantile(c, n - 1),
        label=f"ghe-element(n={n})",
    )


def singular_value_joint_pdf(values, LA, LB):
    """Unnormalised joint density ``prod (1-s_i^2)^|LA-LB| prod_{j<k} (s_j^2-s_k^2)^2``."""
    s = np.asarray(values, dtype=float).reshape(-1)
    if LA > LB:
        raise DomainError("need LA <= LB")
    if s.size != LA:
        raise DomainError(f"expected {LA} singular values, got {s.size}")
    if np.any((s < 0.0) | (s > 1.0)):
        raise DomainError("singular values must lie in [0, 1]")
    sq = s * s
    val = np.prod((1.0 - sq) ** abs(LA - LB))
    diff = sq[:, None] - sq[None, :]
    val *= np.prod(diff[np.triu_indices(s.size, 1)] ** 2)
    return float(val)


def page_mean(L, LA):
    """Mean GHE entanglement entropy (nats) of ``LA`` out of ``L`` modes.

    The ``psi(L - LA)`` term enters with weight ``-1/4``; this reproduces
    ``int_0^1 h(s) ds = 1/2`` at ``L = 2, LA = 1`` where the element law is
    uniform.
    """
    if not 1 <= LA < L:
        raise DomainError(f"need 1 <= LA < L, got LA={LA}, L={L}")
    return ((L - 0.5) * digamma(2 * L) + (0.25 - LA) * digamma(L)
            + (0.5 + LA - L) * digamma(2 * L - 2 * LA) - 0.25 * digamma(L - LA) - LA)


def page_variance_limit(f):
    """Large-``L`` variance of the GHE entanglement entropy at fraction ``f``."""
    if not 0.0 < f < 1.0:
        raise DomainError(f"f must lie in (0, 1), got {f}")
    return 0.5 * (f + f * f + math.log1p(-f))


@dataclass(frozen=True)
class ObservableFunction:
    """Scalar function of a subsystem covariance matrix.

    ``evaluate`` accepts a single matrix or a stack ``(K, 2L_A, 2L_A)`` and
    returns floats of matching leading shape.
    """

    identifier: str
    func: Callable
    majoranas: tuple
    bounds: tuple
    lipschitz: Optional[float] = None
    kind: str = "corr"

    def evaluate(self, gamma):
        g = _as_gamma(gamma)
        need = max(self.majoranas, default=-1) + 1
        if g.shape[-1] < need:
            raise DomainError(f"{self.identifier} needs at least {need} Majoranas")
        out = self.func(g)
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)

    __call__ = evaluate

    def reference(self, LA):
        """Analytic GHE law of this observable on ``LA`` modes, if known."""
        if self.kind == "corr" and LA >= 2:
            return ghe_element_reference(LA - 1)
        return None


def _parse_indices(text):
    text = text.strip()
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    items = [int(t) for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError(f"no indices in {text!r}")
    return items


def _zero_based(items):
    if min(items) < 1:
        raise ValueError("observable indices are 1-based")
    return [i - 1 for i in items]


def parse_observable(identifier):
    """Build an :class:`ObservableFunction` from a string identifier.

    Recognised forms (1-based indices)::

        corr:i,j            Gamma_ij
        npoint:i,j,k,l      Pfaffian of Gamma on {i, j, k, l}
        vn:1..k | vn:1,3    von Neumann entropy of the listed modes
        renyi:a:1..k        Renyi-a entropy of the listed modes
    """
    try:
        kind, _, rest = identifier.partition(":")
        if kind == "corr":
            i, j = _zero_based(_parse_indices(rest))
            if i == j:
                raise DomainError("diagonal correlators vanish identically")
            return ObservableFunction(identifier, lambda g: g[..., i, j], (i, j),
                                      (-1.0, 1.0), 1.0, "corr")
        if kind == "npoint":
            idx = _zero_based(_parse_indices(rest))
            if len(idx) % 2:
                raise ParityError("npoint observables need an even index count")
            if len(set(idx)) != len(idx):
                raise ValueError("Majorana indices must be distinct")
            return ObservableFunction(identifier, lambda g: npoint_correlator(g, idx),
                                      tuple(idx), (-1.0, 1.0), None, "npoint")
        if kind == "vn":
            modes = _zero_based(_parse_indices(rest))
            return ObservableFunction(identifier, lambda g: von_neumann_entropy(g, modes),
                                      tuple(majorana_indices(modes)),
                                      (0.0, len(modes) * math.log(2)), None, "entropy")
        if kind == "renyi":
            a_text, _, mode_text = rest.partition(":")
            alpha = float(a_text)
            modes = _zero_based(_parse_indices(mode_text))
            if alpha == 1.0:
                func = lambda g: von_neumann_entropy(g, modes)  # noqa: E731
            else:
                renyi_entropy(vacuum_matrix(1), alpha)  # validates alpha
                func = lambda g: renyi_entropy(g, alpha, modes)  # noqa: E731
            return ObservableFunction(identifier, func, tuple(majorana_indices(modes)),
                                      (0.0, len(modes) * math.log(2)), None, "entropy")
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad observable {identifier!r}: {exc}") from exc
    raise ValueError(f"unknown observable kind in {identifier!r}")
