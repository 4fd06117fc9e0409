"""Empirical distributions, Wasserstein-1 distances, covariance-matrix
moments and k-design terms.
"""
import csv
import io
import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from .errors import ContractError, ParityError
from .numerics import pfaffian_batch
from .observables import AnalyticCDF, ghe_sample_batch

__all__ = [
    "EmpiricalDistribution",
    "MomentEstimate",
    "DesignTerm",
    "wasserstein1_empirical",
    "wasserstein1_vs_analytic",
    "w1_report",
    "pe_moment",
    "ghe_moment",
    "design_distance_term",
    "concentration_probe",
    "fit_power_law",
    "format_number",
]

WEIGHT_TOL = 1e-10
PANEL_ABS_TOL = 1e-9
DEFAULT_GHE_BUDGET = 10 ** 6
CONCENTRATION_KAPPA = 1.0 / 64.0


def format_number(x):
    """Twelve significant digits, the fixed CSV number format."""
    return f"{x:.12g}"


class EmpiricalDistribution:
    """Weighted multiset of reals with its right-continuous step CDF.

    Equal samples are merged into one atom carrying their total weight.

    Parameters
    ----------
    samples : array_like
    weights : array_like, optional
        Non-negative, normalised internally; uniform when omitted.
    """

    def __init__(self, samples, weights=None):
        x = np.asarray(samples, dtype=float).reshape(-1)
        if x.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite")
        if weights is None:
            w = np.full(x.size, 1.0 / x.size)
        else:
            w = np.asarray(weights, dtype=float).reshape(-1)
            if w.shape != x.shape:
                raise ValueError("weights and samples differ in length")
            if np.any(w < 0) or not np.sum(w) > 0:
                raise ValueError("weights must be non-negative with positive total")
            w = w / np.sum(w)
        self.values, inverse = np.unique(x, return_inverse=True)
        self.weights = np.bincount(inverse.reshape(-1), weights=w, minlength=self.values.size)
        self.sample_count = x.size
        self._cum = np.cumsum(self.weights)
        self._cum[-1] = 1.0
        if abs(np.sum(self.weights) - 1.0) > WEIGHT_TOL:
            raise ValueError("weights do not sum to one")

    def __len__(self):
        return self.values.size

    def cdf(self, x):
        pos = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right")
        out = np.where(pos > 0, self._cum[np.maximum(pos - 1, 0)], 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def cumulative(self):
        """CDF value on each atom (the step heights)."""
        return self._cum.copy()

    def mean(self):
        return float(np.dot(self.weights, self.values))

    def variance(self):
        mu = self.mean()
        return float(np.dot(self.weights, (self.values - mu) ** 2))

    def to_csv(self, path=None):
        """Dump ``value,weight`` rows; returns the text when ``path`` is None."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "weight"])
        for v, p in zip(self.values, self.weights):
            w.writerow([format_number(v), format_number(p)])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])


def wasserstein1_empirical(p, q):
    """Exact ``int |P(x) - Q(x)| dx`` between two step CDFs."""
    if not isinstance(p, EmpiricalDistribution):
        p = EmpiricalDistribution(p)
    if not isinstance(q, EmpiricalDistribution):
        q = EmpiricalDistribution(q)
    xs = np.union1d(p.values, q.values)
    if xs.size < 2:
        return 0.0
    gap = np.abs(p.cdf(xs[:-1]) - q.cdf(xs[:-1]))
    return float(np.sum(gap * np.diff(xs)))


def _check_reference(ref, a, b):
    grid = np.linspace(a, b, 1025)
    vals = np.asarray(ref.cdf(grid), dtype=float)
    if abs(vals[0]) > 1e-8 or abs(vals[-1] - 1.0) > 1e-8:
        raise ContractError("reference CDF must run from 0 at a to 1 at b")
    if np.any(np.diff(vals) < -1e-12):
        raise ContractError("reference CDF is not monotone")


def _panels(p, a, b):
    lo = min(a, p.values[0])
    hi = max(b, p.values[-1])
    knots = np.concatenate([[lo], p.values, [hi]])
    steps = np.concatenate([[0.0], p.cumulative])
    return knots[:-1], knots[1:], steps


def _closed_form(ref, left, right, steps, a, b):
    def anti(x):
        return np.asarray(ref.integral(np.clip(x, a, b))) + np.maximum(x - b, 0.0)

    cross = np.clip(np.asarray(ref.quantile(steps)), left, right)
    g_l, g_r, g_c = anti(left), anti(right), anti(cross)
    below = steps * (cross - left) - (g_c - g_l)
    above = (g_r - g_c) - steps * (right - cross)
    return float(np.sum(np.maximum(below, 0.0) + np.maximum(above, 0.0)))


def _quadrature(ref, left, right, steps, a, b):
    def f(x):
        return float(ref.cdf(min(max(x, a), b)))

    total = 0.0
    for l, r, c in zip(left, right, steps):
        if r <= l:
            continue
        fl, fr = f(l), f(r)
        pieces = [(l, r)]
        if fl < c < fr:
            x0 = optimize.brentq(lambda x: f(x) - c, l, r, xtol=1e-14)
            pieces = [(l, x0), (x0, r)]
        for lo, hi in pieces:
            val, _ = integrate.quad(lambda x: c - f(x), lo, hi, epsabs=PANEL_ABS_TOL,
                                    epsrel=0.0, limit=200)
            total += abs(val)
    return total


def wasserstein1_vs_analytic(p, reference, support=None, method="auto"):
    """``int |P(x) - F(x)| dx`` between a step CDF and a continuous CDF ``F``.

    Parameters
    ----------
    p : EmpiricalDistribution or array_like
    reference : AnalyticCDF or callable
        A bare callable needs ``support``.
    method : {"auto", "closed", "quadrature"}
        ``closed`` uses the reference's antiderivative and quantile and is
        exact up to rounding; ``quadrature`` integrates each panel between
        consecutive atoms with adaptive Gauss-Kronrod. ``auto`` picks
        ``closed`` when available.

    Raises
    ------
    ContractError
        If the reference CDF is not monotone or misses 0 and 1 at the ends.
    """
    if not isinstance(p, EmpiricalDistribution):
        p = EmpiricalDistribution(p)
    if not isinstance(reference, AnalyticCDF):
        if support is None:
            raise ValueError("support is required for a bare CDF callable")
        reference = AnalyticCDF(reference, tuple(support))
    a, b = support if support is not None else reference.support
    _check_reference(reference, a, b)
    left, right, steps = _panels(p, a, b)
    has_closed = reference.integral is not None and reference.quantile is not None
    if method == "closed" or (method == "auto" and has_closed):
        if not has_closed:
            raise ValueError("reference has no closed-form antiderivative")
        return _closed_form(reference, left, right, steps, a, b)
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    return _quadrature(reference, left, right, steps, a, b)


def w1_report(value, method, tolerance, sample_counts, seeds):
    """JSON text of a Wasserstein-1 evaluation record."""
    return json.dumps({"value": float(value), "method": method, "tolerance": tolerance,
                       "sample_counts": list(sample_counts), "seeds": list(seeds)},
                      sort_keys=True)


def _check_pairs(indices, k, dim):
    pairs = [tuple(int(v) for v in pair) for pair in indices]
    if len(pairs) != k:
        raise ValueError(f"moment of order {k} needs {k} index pairs")
    for i, j in pairs:
        if not (0 <= i < dim and 0 <= j < dim):
            raise IndexError(f"index pair {(i, j)} out of range for dimension {dim}")
    return pairs


def _products(gammas, pairs):
    out = np.ones(gammas.shape[0])
    for i, j in pairs:
        out = out * gammas[:, i, j]
    return out


def pe_moment(ensemble, k, indices):
    """``sum_m w_m prod_a [Gamma^A_m]_{i_a j_a}`` with the ensemble's weights."""
    if k < 1:
        raise ValueError("moment order must be >= 1")
    pairs = _check_pairs(indices, k, ensemble.gammas.shape[-1])
    return float(np.dot(ensemble.weights, _products(ensemble.gammas, pairs)))


class MomentEstimate(NamedTuple):
    value: float
    stderr: float
    budget: int


def _jackknife_mean(x):
    n = x.size
    loo = (np.sum(x) - x) / (n - 1)
    return float(np.mean(x)), float(math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def ghe_moment(spec, k, indices, budget=DEFAULT_GHE_BUDGET, rng=None):
    """Monte Carlo GHE moment with a jackknife standard error."""
    if budget < 1000:
        raise ValueError("GHE moment budget must be at least 1000")
    modes = spec.modes if hasattr(spec, "modes") else int(spec)
    pairs = _check_pairs(indices, k, 2 * modes)
    vals = _products(ghe_sample_batch(modes, budget, rng), pairs)
    value, se = _jackknife_mean(vals)
    return MomentEstimate(value, se, budget)


class DesignTerm(NamedTuple):
    value: float
    pe_term: float
    ghe_term: float
    ghe_stderr: float


def _wick_products(gammas, sets):
    out = np.ones(gammas.shape[0])
    for s in sets:
        if s:
            out = out * pfaffian_batch(gammas[:, s, :][:, :, s])
    return out


def design_distance_term(ensemble, ghe, sets, budget=DEFAULT_GHE_BUDGET, rng=None):
    """``Delta_S``: PE average of ``prod_a Pf(Gamma_{S_a})`` minus its GHE average.

    Parameters
    ----------
    ensemble : ProjectedEnsemble
    ghe : GheSpec or int
    sets : sequence of index sequences
        One Majorana subset per copy, each of even size (0-based).
    """
    sets = [[int(i) for i in s] for s in sets]
    for s in sets:
        if len(s) % 2:
            raise ParityError(f"copy subset {s} has odd size")
    pe_term = float(np.dot(ensemble.weights, _wick_products(ensemble.gammas, sets)))
    if not any(sets):
        return DesignTerm(pe_term - 1.0, pe_term, 1.0, 0.0)
    modes = ghe.modes if hasattr(ghe, "modes") else int(ghe)
    vals = _wick_products(ghe_sample_batch(modes, budget, rng), sets)
    ghe_term, se = _jackknife_mean(vals)
    return DesignTerm(pe_term - ghe_term, pe_term, ghe_term, se)


@dataclass(frozen=True)
class ConcentrationRow:
    epsilon: float
    exceedance: float
    bound: float
    binomial_sigma: float
    instances: int


def concentration_probe(deviations, eps_grid, LB, k=1, kappa=CONCENTRATION_KAPPA):
    """Exceedance frequencies ``P(|dev| > eps)`` against ``exp(-kappa LB eps^2 / k^2)``.

    ``deviations`` holds one moment deviation per circuit instance.
    ``binomial_sigma`` is the standard deviation of the exceedance frequency
    if the bound were attained.
    """
    dev = np.abs(np.asarray(deviations, dtype=float).reshape(-1))
    n = dev.size
    if n < 20:
        raise ValueError("concentration probe needs at least 20 instances")
    rows = []
    for eps in sorted(float(e) for e in eps_grid):
        bound = min(1.0, math.exp(-kappa * LB * eps * eps / (k * k)))
        rows.append(ConcentrationRow(eps, float(np.mean(dev > eps)), bound,
                                     math.sqrt(bound * (1.0 - bound) / n), n))
    return rows


class PowerLawFit(NamedTuple):
    slope: float
    slope_stderr: float
    intercept: float


def fit_power_law(x, y):
    """Ordinary least squares of ``log y`` on ``log x``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ValueError("need at least two points for a fit")
    res = np.polyfit(lx, ly, 1, full=False, cov=False)
    slope, intercept = float(res[0]), float(res[1])
    if lx.size > 2:
        resid = ly - (slope * lx + intercept)
        s2 = float(np.sum(resid ** 2)) / (lx.size - 2)
        se = math.sqrt(s2 / float(np.sum((lx - lx.mean()) ** 2)))
    else:
        se = float("nan")
    return PowerLawFit(slope, se, intercept)
