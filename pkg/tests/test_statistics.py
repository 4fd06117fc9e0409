import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate
from scipy.stats import wasserstein_distance

from deepthermal import dense
from deepthermal.errors import ContractError, ParityError
from deepthermal.gaussian_state import global_random_state
from deepthermal.measurement import build_projected_ensemble
from deepthermal.observables import (
    AnalyticCDF,
    GheSpec,
    ghe_element_pdf,
    ghe_element_reference,
    ghe_sample_batch,
)
from deepthermal.statistics import (
    EmpiricalDistribution,
    concentration_probe,
    design_distance_term,
    fit_power_law,
    format_number,
    ghe_moment,
    pe_moment,
    w1_report,
    wasserstein1_empirical,
    wasserstein1_vs_analytic,
)

finite = st.floats(-5, 5, allow_nan=False)
samples = st.lists(finite, min_size=1, max_size=30)


def uniform_cdf(a, b):
    return AnalyticCDF(lambda x: np.clip((np.asarray(x) - a) / (b - a), 0, 1), (a, b))


def test_empirical_distribution_merges_ties():
    p = EmpiricalDistribution([0.5, 0.1, 0.5, 0.5])
    assert np.allclose(p.values, [0.1, 0.5])
    assert np.allclose(p.weights, [0.25, 0.75])
    assert p.cdf(0.3) == 0.25 and p.cdf(0.5) == 1.0 and p.cdf(-1) == 0.0
    assert p.mean() == pytest.approx(0.4)
    for bad in ([], [np.nan]):
        with pytest.raises(ValueError):
            EmpiricalDistribution(bad)
    with pytest.raises(ValueError):
        EmpiricalDistribution([1, 2], weights=[0, 0])


def test_empirical_csv_roundtrip(tmp_path):
    p = EmpiricalDistribution([0.3, -0.2, 0.3], weights=[1, 2, 3])
    path = tmp_path / "p.csv"
    p.to_csv(path)
    q = EmpiricalDistribution.from_csv(path)
    assert np.allclose(q.values, p.values) and np.allclose(q.weights, p.weights)
    assert format_number(1 / 3) == "0.333333333333"


def test_w1_point_masses():
    assert wasserstein1_empirical([0.0], [0.3]) == pytest.approx(0.3)
    assert wasserstein1_empirical([0.0, 1.0], [0.0, 1.0]) == 0.0


def test_w1_shifted_uniforms():
    # step CDF of many equispaced atoms on [0, 1] against the uniform law on [0.5, 1.5]
    x = (np.arange(20000) + 0.5) / 20000
    assert wasserstein1_vs_analytic(x, uniform_cdf(0.5, 1.5), support=(0.0, 1.5),
                                    method="quadrature") == pytest.approx(0.5, abs=1e-4)


@given(samples, samples)
def test_w1_matches_scipy(a, b):
    assert wasserstein1_empirical(a, b) == pytest.approx(wasserstein_distance(a, b), abs=1e-9)


@given(samples, samples, samples)
def test_w1_metric(a, b, c):
    ab, ba = wasserstein1_empirical(a, b), wasserstein1_empirical(b, a)
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ab >= 0 and wasserstein1_empirical(a, a) == 0
    assert ab <= wasserstein1_empirical(a, c) + wasserstein1_empirical(c, b) + 1e-9


@pytest.mark.parametrize("n, value", [(3, 0.3125), (4, 0.2734375)])
def test_w1_single_atom_frozen(n, value):
    # mpmath oracle: int |1{x >= 0} - F_n(x)| dx with density (1 - x^2)^(n - 1)
    ref = ghe_element_reference(n)
    assert wasserstein1_vs_analytic([0.0], ref) == pytest.approx(value, abs=1e-12)
    assert wasserstein1_vs_analytic([0.0], ref, method="quadrature") == pytest.approx(value, abs=1e-8)


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.integers(1, 8))
def test_w1_closed_form_matches_quadrature(xs, n):
    ref = ghe_element_reference(n)
    assert wasserstein1_vs_analytic(xs, ref, method="closed") == pytest.approx(
        wasserstein1_vs_analytic(xs, ref, method="quadrature"), abs=1e-7)


def test_w1_self_consistency_large_sample():
    ref = ghe_element_reference(2)
    x = ghe_sample_batch(3, 2 * 10 ** 5, np.random.default_rng(21))[:, 0, 1]
    assert wasserstein1_vs_analytic(x, ref) <= 5e-3


def test_w1_degenerate_cdf_and_contract():
    # a reference that is itself a step at 0.2 gives the point-mass distance
    step = AnalyticCDF(lambda x: (np.asarray(x) >= 0.2).astype(float), (-1.0, 1.0))
    assert wasserstein1_vs_analytic([0.0], step, method="quadrature") == pytest.approx(0.2, abs=1e-8)
    with pytest.raises(ContractError):
        wasserstein1_vs_analytic([0.0], lambda x: 0.5 * (np.asarray(x) + 1), support=(-1.0, 2.0))
    wiggle = lambda x: np.clip((np.asarray(x) + 1) / 2 + 0.3 * np.sin(6 * np.asarray(x)) * (1 - np.asarray(x) ** 2), 0, 1)  # noqa: E731,E501
    with pytest.raises(ContractError):
        wasserstein1_vs_analytic([0.0], wiggle, support=(-1.0, 1.0))
    with pytest.raises(ValueError):
        wasserstein1_vs_analytic([0.0], lambda x: x)


def test_w1_decays_like_inverse_sqrt():
    ref = ghe_element_reference(1)
    rng = np.random.default_rng(22)
    Rs = [100, 1000, 10000]
    means = [np.mean([wasserstein1_vs_analytic(rng.uniform(-1, 1, R), ref) for _ in range(40)])
             for R in Rs]
    assert fit_power_law(Rs, means).slope == pytest.approx(-0.5, abs=0.05)


def test_w1_report_json():
    import json
    doc = json.loads(w1_report(0.01, "closed", 1e-9, [100], [7]))
    assert doc["method"] == "closed" and doc["seeds"] == [7]


def test_ghe_moments():
    m = ghe_moment(GheSpec(2), 2, [(0, 1), (0, 1)], budget=2 * 10 ** 5,
                   rng=np.random.default_rng(23))
    assert abs(m.value - 1 / 3) < 4 * m.stderr
    second = integrate.quad(lambda x: x * x * ghe_element_pdf(x, 2), -1, 1)[0]
    m3 = ghe_moment(3, 2, [(0, 3), (0, 3)], budget=2 * 10 ** 5, rng=np.random.default_rng(24))
    assert abs(m3.value - second) < 4 * m3.stderr
    with pytest.raises(ValueError):
        ghe_moment(2, 1, [(0, 1)], budget=10)
    with pytest.raises(ValueError):
        ghe_moment(2, 2, [(0, 1)])


def test_pe_moment_first_order_is_reduced_state():
    st_, _ = global_random_state(6, np.random.default_rng(25))
    ens = build_projected_ensemble(st_, 2)
    assert pe_moment(ens, 1, [(0, 3)]) == pytest.approx(st_.gamma[0, 3], abs=1e-10)
    with pytest.raises(IndexError):
        pe_moment(ens, 1, [(0, 4)])


def test_design_term_against_dense():
    st_, o = global_random_state(5, np.random.default_rng(26))
    ds = dense.dense_oracle_state(o)
    LA = 2
    ens = build_projected_ensemble(st_, LA)
    sets = [[0, 1, 2, 3], [1, 2]]
    expected = 0.0
    probs = dense.block_probabilities_dense(ds, LA)
    for m in ens.outcomes:
        p = probs[int("".join(map(str, m)), 2)]
        cond = dense.conditional_state_dense(ds, LA, m)
        expected += p * np.prod([dense.correlator_from_dense(cond, s, LA) for s in sets])
    term = design_distance_term(ens, LA, sets, budget=10 ** 5, rng=np.random.default_rng(27))
    assert term.pe_term == pytest.approx(expected, abs=1e-9)
    assert term.value == pytest.approx(term.pe_term - term.ghe_term)


def test_design_term_edge_cases(rng):
    st_, _ = global_random_state(4, rng)
    ens = build_projected_ensemble(st_, 2)
    assert design_distance_term(ens, 2, [[], []]).value == 0.0
    with pytest.raises(ParityError):
        design_distance_term(ens, 2, [[0, 1, 2]])


def test_concentration_probe():
    dev = np.r_[np.zeros(15), np.full(5, 0.3)]
    rows = concentration_probe(dev, [0.4, 0.2], LB=64)
    assert [r.epsilon for r in rows] == [0.2, 0.4]
    assert rows[0].exceedance == 0.25 and rows[1].exceedance == 0.0
    assert rows[0].bound == pytest.approx(math.exp(-64 * 0.04 / 64))
    with pytest.raises(ValueError):
        concentration_probe(dev[:10], [0.1], LB=8)


def test_power_law_fit():
    x = np.array([8, 16, 32, 64])
    fit = fit_power_law(x, 3.0 * x ** -0.5)
    assert fit.slope == pytest.approx(-0.5) and fit.slope_stderr == pytest.approx(0, abs=1e-12)
    assert math.isnan(fit_power_law([1, 2], [1, 2]).slope_stderr)
