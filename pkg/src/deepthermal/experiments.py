"""Experiment drivers: W1 convergence of projected ensembles, entanglement
statistics, operator spreading, design distances and concentration.

Every driver is a pure function of its :class:`ExperimentConfig`. Random
streams are counter-based Philox generators keyed by
``SeedSequence(seed, spawn_key=(LB, instance, purpose, extra))`` so that
instance ``i`` never depends on how many other instances ran before it.
Within a stream, shot ``s`` consumes the ``s``-th row of ``L_B`` uniforms,
so the first ``R`` shots of a larger run are the same shots.
"""
import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import ConfigError
from .gaussian_state import BrickworkEvolution, global_random_state, vacuum_matrix
from .measurement import build_projected_ensemble
from .observables import (
    AnalyticCDF,
    GheSpec,
    ghe_sample_batch,
    page_mean,
    page_variance_limit,
    parse_observable,
    von_neumann_entropy,
)
from .statistics import (
    EmpiricalDistribution,
    concentration_probe,
    design_distance_term,
    fit_power_law,
    format_number,
    ghe_moment,
    pe_moment,
    wasserstein1_empirical,
    wasserstein1_vs_analytic,
)

CONVENTIONS = {
    "time_step": "one even layer (pairs (1,2),(3,4),...) followed by one odd layer",
    "boundary": "open",
    "log_base": "natural (nats)",
    "indices": "observable strings are 1-based; library calls are 0-based",
    "partition": "A = first LA modes, B = the remaining LB modes, L = LA + LB",
    "seed_rule": "Philox(SeedSequence(seed, spawn_key=(LB, instance, purpose, extra)))",
    "ghe_element_parameter": "n = LA - 1",
}

CIRCUIT, SHOTS, GHE, BASELINE = 0, 1, 2, 3
_GHE_CHUNK = 65536


def derive_rng(seed, *key):
    """Counter-based generator for the stream identified by ``key``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class ExperimentResult:
    """Tables produced by a driver plus derived summary numbers."""

    name: str
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    extra_tables: dict = field(default_factory=dict)
    instance_keys: list = field(default_factory=list)

    def column(self, name, **where):
        j = self.columns.index(name)
        keep = [r for r in self.rows
                if all(r[self.columns.index(k)] == v for k, v in where.items())]
        return np.array([r[j] for r in keep])


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_number(float(v))
    return str(v)


def table_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(np.mean(v)), se


def checkpoints(cfg, default_max=1024):
    """Explicit ``t_list`` or the doubling grid ``1, 2, 4, ...`` capped by ``t_max``."""
    if cfg.t_list:
        return sorted(set(cfg.t_list))
    t_max = default_max if cfg.t_max is None else cfg.t_max
    ts, t = [], 1
    while t < t_max:
        ts.append(t)
        t *= 2
    ts.append(t_max)
    return sorted(set(ts))


def _distance(dist, reference):
    if isinstance(reference, EmpiricalDistribution):
        return wasserstein1_empirical(dist, reference)
    return wasserstein1_vs_analytic(dist, reference)


def ghe_observable_samples(obs, LA, budget, rng):
    """``budget`` values of ``obs`` on GHE samples, drawn in chunks."""
    out = np.empty(budget)
    for lo in range(0, budget, _GHE_CHUNK):
        hi = min(budget, lo + _GHE_CHUNK)
        out[lo:hi] = obs.evaluate(ghe_sample_batch(LA, hi - lo, rng))
    return out


def ghe_reference(obs, LA, cfg):
    """Analytic GHE law when known (and allowed), otherwise an empirical one."""
    if cfg.ghe_reference != "empirical":
        ref = obs.reference(LA)
        if ref is not None:
            return ref
        if cfg.ghe_reference == "analytic":
            raise ConfigError(f"no analytic GHE law for {obs.identifier} at LA={LA}")
    if cfg.ghe_budget < 1:
        raise ConfigError("an empirical GHE reference needs ghe_budget >= 1")
    vals = ghe_observable_samples(obs, LA, cfg.ghe_budget, derive_rng(cfg.seed, 0, 0, GHE))
    return EmpiricalDistribution(vals)


def _ensemble_distribution(gamma, cfg, obs, rng, shots=None):
    ens = build_projected_ensemble(gamma, cfg.LA, cfg.mode, shots=shots or cfg.R, rng=rng)
    return ens, EmpiricalDistribution(obs.evaluate(ens.gammas), ens.weights)


def _state_at(L, cfg, rng, t=None):
    if cfg.dynamics == "global":
        return global_random_state(L, rng)[0].gamma
    evo = BrickworkEvolution(L, rng, track_rotation=False)
    return evo.step(t if t is not None else (max(cfg.t_list) if cfg.t_list else cfg.t_max or 0)).gamma


def _fit_summary(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return None
    fit = fit_power_law(x[ok], y[ok])
    return {"slope": fit.slope, "slope_stderr": fit.slope_stderr, "points": int(ok.sum())}


def exp_w1_global(cfg):
    """Mean W1 between PE and GHE laws of a scalar observable for Haar-random
    global states, per ``LB`` (and per ``R`` when ``R_list`` is given).

    With ``baseline = true`` also reports GHE-vs-reference distances for
    ``R`` GHE samples, isolating the finite-``R`` floor.
    """
    obs = parse_observable(cfg.observable)
    ref = ghe_reference(obs, cfg.LA, cfg)
    r_values = sorted(set(cfg.R_list or [cfg.R]))
    r_max = max(r_values)
    columns = ["source", "LB", "L", "R", "N", "mean_w1", "se_w1"]
    rows, keys, summary = [], [], {}
    for LB in cfg.LB_list:
        L = cfg.LA + LB
        w = np.zeros((cfg.N, len(r_values)))
        for i in range(cfg.N):
            keys.append([LB, i])
            gamma = global_random_state(L, derive_rng(cfg.seed, LB, i, CIRCUIT))[0].gamma
            ens = build_projected_ensemble(gamma, cfg.LA, cfg.mode, shots=r_max,
                                           rng=derive_rng(cfg.seed, LB, i, SHOTS))
            vals = obs.evaluate(ens.gammas)
            for j, R in enumerate(r_values):
                if cfg.mode == "exhaustive":
                    dist = EmpiricalDistribution(vals, ens.weights)
                else:
                    dist = EmpiricalDistribution(vals[:R])
                w[i, j] = _distance(dist, ref)
        for j, R in enumerate(r_values):
            rows.append(["pe", LB, L, R, cfg.N, *_mean_se(w[:, j])])
    for R in r_values:
        lbs = [r[1] for r in rows if r[0] == "pe" and r[3] == R]
        means = [r[5] for r in rows if r[0] == "pe" and r[3] == R]
        summary[f"slope_vs_LB_R{R}"] = _fit_summary(lbs, means)
    if cfg.baseline:
        w = np.zeros((cfg.N, len(r_values)))
        for i in range(cfg.N):
            vals = ghe_observable_samples(obs, cfg.LA, r_max, derive_rng(cfg.seed, 0, i, BASELINE))
            for j, R in enumerate(r_values):
                w[i, j] = _distance(EmpiricalDistribution(vals[:R]), ref)
        for j, R in enumerate(r_values):
            rows.append(["ghe", 0, cfg.LA, R, cfg.N, *_mean_se(w[:, j])])
        summary["baseline_slope_vs_R"] = _fit_summary(
            r_values, [r[5] for r in rows if r[0] == "ghe"])
    return ExperimentResult("w1-global", columns, rows, summary, instance_keys=keys)


def _plateau(ts, means):
    ts, means = np.asarray(ts, dtype=float), np.asarray(means, dtype=float)
    late = ts >= ts.max() / 10.0
    return float(np.mean(means[late]))


def _transient_fit(cfg, ts, means):
    ts, means = np.asarray(ts, dtype=float), np.asarray(means, dtype=float)
    if cfg.t_fit:
        keep = (ts >= cfg.t_fit[0]) & (ts <= cfg.t_fit[1])
    else:
        keep = ts > 0
    return _fit_summary(ts[keep], means[keep])


def _brickwork_sweep(cfg, observables, references):
    """Mean W1 per (observable, LB, t) over instances of brickwork circuits."""
    ts = checkpoints(cfg)
    results, keys = {}, []
    for LB in cfg.LB_list:
        L = cfg.LA + LB
        w = np.zeros((len(observables), cfg.N, len(ts)))
        for i in range(cfg.N):
            keys.append([LB, i])
            evo = BrickworkEvolution(L, derive_rng(cfg.seed, LB, i, CIRCUIT), track_rotation=False)
            for k, t in enumerate(ts):
                evo.advance_to(t)
                ens = build_projected_ensemble(evo.gamma, cfg.LA, cfg.mode, shots=cfg.R,
                                               rng=derive_rng(cfg.seed, LB, i, SHOTS, t))
                for a, (obs, ref) in enumerate(zip(observables, references)):
                    dist = EmpiricalDistribution(obs.evaluate(ens.gammas), ens.weights)
                    w[a, i, k] = _distance(dist, ref)
        results[LB] = w
    return ts, results, keys


def _local_tables(cfg, labels, ts, results, label_name):
    columns = [label_name, "LB", "L", "t", "N", "mean_w1", "se_w1"]
    rows, summary = [], {}
    for a, label in enumerate(labels):
        plateaus = []
        for LB in cfg.LB_list:
            means = []
            for k, t in enumerate(ts):
                m, se = _mean_se(results[LB][a, :, k])
                rows.append([label, LB, cfg.LA + LB, t, cfg.N, m, se])
                means.append(m)
            summary[f"{label}_LB{LB}_transient"] = _transient_fit(cfg, ts, means)
            plateau = _plateau(ts, means)
            summary[f"{label}_LB{LB}_plateau"] = plateau
            plateaus.append(plateau)
        if len(cfg.LB_list) > 1:
            summary[f"{label}_plateau_slope_vs_LB"] = _fit_summary(cfg.LB_list, plateaus)
    return columns, rows, summary


def exp_w1_local(cfg):
    """W1 of the PE vs the GHE law as a function of brickwork depth ``t``."""
    obs = parse_observable(cfg.observable)
    ref = ghe_reference(obs, cfg.LA, cfg)
    ts, results, keys = _brickwork_sweep(cfg, [obs], [ref])
    columns, rows, summary = _local_tables(cfg, [cfg.observable], ts, results, "observable")
    return ExperimentResult("w1-local", columns, rows, summary, instance_keys=keys)


def entropy_observable(alpha, LA1):
    if alpha == 1.0:
        return parse_observable(f"vn:1..{LA1}")
    return parse_observable(f"renyi:{alpha:g}:1..{LA1}")


def exp_w1_entropy(cfg):
    """W1(t) for von Neumann / Renyi entropies of the first ``LA1`` modes of A.

    The GHE reference is always empirical with at least ``10^6`` samples.
    """
    if cfg.ghe_budget < 10 ** 6:
        raise ConfigError("w1-entropy needs ghe_budget >= 1000000")
    observables = [entropy_observable(a, cfg.LA1) for a in cfg.alpha]
    references = []
    for a, obs in enumerate(observables):
        vals = ghe_observable_samples(obs, cfg.LA, cfg.ghe_budget,
                                      derive_rng(cfg.seed, 0, a, GHE))
        references.append(EmpiricalDistribution(vals))
    ts, results, keys = _brickwork_sweep(cfg, observables, references)
    labels = [f"{a:g}" for a in cfg.alpha]
    columns, rows, summary = _local_tables(cfg, labels, ts, results, "alpha")
    return ExperimentResult("w1-entropy", columns, rows, summary, instance_keys=keys)


def exp_page_curve(cfg):
    """PE entanglement mean and variance of the first ``LA1`` modes of A,
    for ``LA1 = 1..LA``, against the GHE formula and Monte Carlo."""
    LB = cfg.LB_list[0]
    L = cfg.LA + LB
    per = np.zeros((cfg.N, cfg.LA, 2))
    keys = []
    for i in range(cfg.N):
        keys.append([LB, i])
        gamma = _state_at(L, cfg, derive_rng(cfg.seed, LB, i, CIRCUIT))
        ens = build_projected_ensemble(gamma, cfg.LA, cfg.mode, shots=cfg.R,
                                       rng=derive_rng(cfg.seed, LB, i, SHOTS))
        w = ens.weights
        for a in range(1, cfg.LA + 1):
            s = von_neumann_entropy(ens.gammas, range(a))
            mu = float(np.dot(w, s))
            per[i, a - 1] = mu, float(np.dot(w, (s - mu) ** 2))
    ghe_s = np.zeros((cfg.LA, 0))
    if cfg.ghe_budget > 0:
        rng = derive_rng(cfg.seed, 0, 0, GHE)
        chunks = []
        for lo in range(0, cfg.ghe_budget, _GHE_CHUNK):
            g = ghe_sample_batch(cfg.LA, min(_GHE_CHUNK, cfg.ghe_budget - lo), rng)
            chunks.append([von_neumann_entropy(g, range(a)) for a in range(1, cfg.LA + 1)])
        ghe_s = np.concatenate([np.array(c) for c in chunks], axis=1)
    columns = ["LA1", "f", "N", "pe_mean", "pe_mean_se", "pe_var", "pe_var_se",
               "ghe_mean_formula", "ghe_mean_mc", "ghe_mean_mc_se", "ghe_var_mc",
               "ghe_var_limit"]
    rows = []
    for a in range(1, cfg.LA + 1):
        f = a / cfg.LA
        mean, mean_se = _mean_se(per[:, a - 1, 0])
        var, var_se = _mean_se(per[:, a - 1, 1])
        formula = page_mean(cfg.LA, a) if a < cfg.LA else 0.0
        limit = page_variance_limit(f) if f < 1 else 0.0
        if ghe_s.shape[1]:
            mc, mc_se = _mean_se(ghe_s[a - 1])
            mc_var = float(np.var(ghe_s[a - 1], ddof=1))
        else:
            mc = mc_se = mc_var = float("nan")
        rows.append([a, f, cfg.N, mean, mean_se, var, var_se, formula, mc, mc_se, mc_var, limit])
    summary = {"L": L, "LB": LB}
    return ExperimentResult("page-curve", columns, rows, summary, instance_keys=keys)


def plus_state_correlations(L):
    """``c_j = <+...+| gamma_j gamma_L |+...+>`` (0-based ``j``, ``gamma_L`` the
    ``L``-th Majorana counted from 1).

    Computed on the dense Fock space for ``L <= 12``; for larger ``L`` the
    pattern found there is used: ``c = e_{L-1} + i e_L`` (0-based).
    """
    if L % 2 or L < 2:
        raise ConfigError(f"diffusion needs an even L >= 2, got {L}")
    if L <= 12:
        from . import dense

        psi = np.full(2 ** L, 2.0 ** (-L / 2), dtype=complex)
        gam = dense.majoranas(L)
        right = gam[L - 1] @ psi
        return np.array([np.vdot(psi, gam[j] @ right) for j in range(2 * L)])
    c = np.zeros(2 * L, dtype=complex)
    c[L - 1] = 1.0
    c[L] = 1.0j
    return c


def spreading_profile(rotation, c):
    """``p_x`` for ``x = 1..L`` from ``C = R c / sqrt(2)``."""
    amp = rotation @ c / math.sqrt(2.0)
    w = np.abs(amp) ** 2
    return w[0::2] + w[1::2]


def exp_diffusion(cfg):
    """Spreading of ``gamma_L`` under brickwork circuits on ``L`` modes."""
    L = cfg.L
    if L is None:
        raise ConfigError("diffusion needs L")
    c = plus_state_correlations(L)
    ts = checkpoints(cfg, default_max=200)
    if 0 not in ts:
        ts = [0] + ts
    x = np.arange(1, L + 1)
    x0 = (L + 1) / 2.0
    prof = np.zeros((cfg.N, len(ts), L))
    keys = []
    for i in range(cfg.N):
        keys.append([L, i])
        evo = BrickworkEvolution(L, derive_rng(cfg.seed, L, i, CIRCUIT), track_state=False)
        for k, t in enumerate(ts):
            evo.advance_to(t)
            prof[i, k] = spreading_profile(evo.rotation, c)
    mean_prof = prof.mean(axis=0)
    sig_inst = np.sqrt(np.einsum("itx,x->it", prof, (x - x0) ** 2))
    columns = ["t", "N", "sigma_x", "sigma_x_se", "norm_max_dev"]
    rows = []
    sigmas = []
    for k, t in enumerate(ts):
        sigma = float(np.sqrt(np.dot(mean_prof[k], (x - x0) ** 2)))
        sigmas.append(sigma)
        dev = float(np.max(np.abs(prof[:, k].sum(axis=1) - 1.0)))
        rows.append([t, cfg.N, sigma, _mean_se(sig_inst[:, k])[1], dev])
    px_rows = [[t, int(xx), float(p)] for k, t in enumerate(ts) for xx, p in zip(x, mean_prof[k])]
    ts_arr = np.array(ts, dtype=float)
    lo, hi = cfg.t_fit if cfg.t_fit else (10, ts_arr.max())
    keep = (ts_arr >= lo) & (ts_arr <= hi)
    summary = {"sigma_slope": _fit_summary(ts_arr[keep], np.array(sigmas)[keep]),
               "norm_max_dev": float(max(r[4] for r in rows))}
    return ExperimentResult("diffusion", columns, rows, summary,
                            extra_tables={"px.csv": (["t", "x", "p_x"], px_rows)},
                            instance_keys=keys)


def exp_ghe_cdf(cfg):
    """Analytic (and optionally empirical) GHE CDF of an observable on a grid."""
    obs = parse_observable(cfg.observable)
    ref = obs.reference(cfg.LA)
    lo, hi = obs.bounds
    grid = np.linspace(lo, hi, cfg.grid)
    columns = ["x", "cdf_analytic"]
    analytic = None
    if ref is not None:
        analytic = np.asarray(ref.cdf(grid), dtype=float)
    elif obs.kind == "corr" and cfg.LA == 1:
        # pure single-mode GHE: Gamma_12 = +1 almost surely
        analytic = np.where(grid >= 1.0, 1.0, 0.0)
    cols = [grid]
    if analytic is not None:
        cols.append(analytic)
    else:
        columns = ["x"]
    if cfg.ghe_budget > 0:
        vals = ghe_observable_samples(obs, cfg.LA, cfg.ghe_budget, derive_rng(cfg.seed, 0, 0, GHE))
        cols.append(EmpiricalDistribution(vals).cdf(grid))
        columns.append("cdf_empirical")
    rows = [list(r) for r in zip(*cols)]
    return ExperimentResult("ghe-cdf", columns, rows, {"observable": cfg.observable})


def _parse_sets(text):
    sets = []
    for part in text.split(";"):
        part = part.strip()
        sets.append([int(v) - 1 for v in part.split(",") if v.strip()] if part else [])
    return sets


def _parse_pairs(text, k):
    if not text:
        return [(0, 1)] * k
    items = [int(v) - 1 for v in text.replace(";", ",").split(",") if v.strip()]
    if len(items) != 2 * k:
        raise ConfigError(f"indices must list {k} pairs, got {text!r}")
    return [tuple(items[2 * a:2 * a + 2]) for a in range(k)]


def exp_design_distance(cfg):
    """``Delta_S`` between PE and GHE for Haar-random global states."""
    sets = _parse_sets(cfg.sets)
    columns = ["LB", "L", "N", "mean_delta", "se_delta", "mean_abs_delta", "ghe_term",
               "ghe_term_se"]
    rows, keys = [], []
    for LB in cfg.LB_list:
        L = cfg.LA + LB
        deltas, ghe_val, ghe_se = [], None, None
        for i in range(cfg.N):
            keys.append([LB, i])
            gamma = _state_at(L, cfg, derive_rng(cfg.seed, LB, i, CIRCUIT))
            ens = build_projected_ensemble(gamma, cfg.LA, cfg.mode, shots=cfg.R,
                                           rng=derive_rng(cfg.seed, LB, i, SHOTS))
            term = design_distance_term(ens, cfg.LA, sets, budget=max(cfg.ghe_budget, 1000),
                                        rng=derive_rng(cfg.seed, 0, 0, GHE))
            deltas.append(term.value)
            ghe_val, ghe_se = term.ghe_term, term.ghe_stderr
        m, se = _mean_se(deltas)
        rows.append([LB, L, cfg.N, m, se, float(np.mean(np.abs(deltas))), ghe_val, ghe_se])
    return ExperimentResult("design-distance", columns, rows, {"sets": cfg.sets},
                            instance_keys=keys)


def exp_concentration(cfg):
    """Exceedance frequencies of ``|C^(k)_PE - C^(k)_GHE|`` over global instances."""
    pairs = _parse_pairs(cfg.indices, cfg.k)
    budget = max(cfg.ghe_budget, 1000)
    ghe = ghe_moment(GheSpec(cfg.LA), cfg.k, pairs, budget, derive_rng(cfg.seed, 0, 0, GHE))
    columns = ["LB", "epsilon", "N", "exceedance", "bound", "binomial_sigma"]
    rows, keys, summary = [], [], {"ghe_moment": ghe.value, "ghe_moment_se": ghe.stderr}
    for LB in cfg.LB_list:
        devs = []
        for i in range(cfg.N):
            keys.append([LB, i])
            gamma = global_random_state(cfg.LA + LB, derive_rng(cfg.seed, LB, i, CIRCUIT))[0].gamma
            ens = build_projected_ensemble(gamma, cfg.LA, cfg.mode, shots=cfg.R,
                                           rng=derive_rng(cfg.seed, LB, i, SHOTS))
            devs.append(pe_moment(ens, cfg.k, pairs) - ghe.value)
        for row in concentration_probe(devs, cfg.eps_list, LB, cfg.k):
            rows.append([LB, row.epsilon, row.instances, row.exceedance, row.bound,
                         row.binomial_sigma])
    return ExperimentResult("concentration", columns, rows, summary, instance_keys=keys)


DRIVERS = {
    "w1-global": exp_w1_global,
    "w1-local": exp_w1_local,
    "w1-entropy": exp_w1_entropy,
    "page-curve": exp_page_curve,
    "diffusion": exp_diffusion,
    "ghe-cdf": exp_ghe_cdf,
    "design-distance": exp_design_distance,
    "concentration": exp_concentration,
}


def run_experiment(cfg):
    if not isinstance(cfg, ExperimentConfig):
        cfg = ExperimentConfig.from_dict(cfg)
    return DRIVERS[cfg.experiment](cfg)


def _output_dir(cfg):
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    base = os.path.join(cfg.out_dir, f"{cfg.experiment}_{stamp}")
    path, n = base, 1
    while os.path.exists(path):
        path = f"{base}-{n}"
        n += 1
    os.makedirs(path)
    return path


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_outputs(cfg, result, elapsed, out_dir=None):
    """Write ``data.csv`` (plus extra tables) and ``manifest.json``; returns the directory."""
    path = out_dir or _output_dir(cfg)
    files = {"data.csv": table_csv(result.columns, result.rows)}
    for name, (cols, rows) in result.extra_tables.items():
        files[name] = table_csv(cols, rows)
    for name, text in files.items():
        with open(os.path.join(path, name), "w", newline="") as fh:
            fh.write(text)
    manifest = {
        "config": cfg.to_dict(),
        "code_version": __version__,
        "conventions": CONVENTIONS,
        "instance_seeds": [{"spawn_key": [*k, CIRCUIT], "entropy": cfg.seed}
                           for k in result.instance_keys],
        "wall_clock_seconds": elapsed,
        "created": datetime.now(timezone.utc).isoformat(),
        "outputs": sorted(files),
        "summary": _json_safe(result.summary),
    }
    with open(os.path.join(path, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def run_and_write(cfg):
    start = time.perf_counter()
    result = run_experiment(cfg)
    return write_outputs(cfg, result, time.perf_counter() - start), result


__all__ = [
    "CONVENTIONS",
    "ExperimentResult",
    "derive_rng",
    "checkpoints",
    "ghe_reference",
    "ghe_observable_samples",
    "plus_state_correlations",
    "spreading_profile",
    "exp_w1_global",
    "exp_w1_local",
    "exp_w1_entropy",
    "exp_page_curve",
    "exp_diffusion",
    "exp_ghe_cdf",
    "exp_design_distance",
    "exp_concentration",
    "run_experiment",
    "write_outputs",
    "run_and_write",
    "table_csv",
]
