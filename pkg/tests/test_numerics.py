import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from deepthermal.errors import DimensionError, DomainError, InvalidCovarianceError
from deepthermal.numerics import (
    as_antisymmetric,
    canonical_singular_values,
    canonical_singular_values_batch,
    check_special_orthogonal,
    digamma,
    haar_special_orthogonal,
    haar_special_orthogonal_batch,
    pfaffian,
    pfaffian_batch,
    symmetric_beta_cdf,
    symmetric_beta_cdf_integral,
    symmetric_beta_quantile,
)

from conftest import random_antisymmetric

EULER_GAMMA = 0.5772156649015328606


def test_antisymmetric_validation():
    with pytest.raises(ValueError):
        as_antisymmetric([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(DimensionError):
        as_antisymmetric(np.zeros((2, 3)))
    a = as_antisymmetric([[0.0, 1.0], [-1.0 + 1e-14, 0.0]])
    assert np.array_equal(a, -a.T)


def test_pfaffian_small_cases():
    assert pfaffian([[0, 2.5], [-2.5, 0]]) == 2.5
    assert pfaffian(np.zeros((0, 0))) == 1.0
    a = random_antisymmetric(np.random.default_rng(1), 4)
    closed = a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]
    assert pfaffian(a) == pytest.approx(closed, rel=1e-13)


def test_pfaffian_errors_and_zero():
    with pytest.raises(DimensionError):
        pfaffian(np.zeros((3, 3)))
    assert pfaffian(np.zeros((4, 4))) == 0.0


def test_pfaffian_squared_is_determinant_8x8():
    # oracle: LU determinant
    a = random_antisymmetric(np.random.default_rng(8), 8)
    assert pfaffian(a) ** 2 == pytest.approx(np.linalg.det(a), rel=1e-8)


@given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_pfaffian_properties(half, seed):
    rng = np.random.default_rng(seed)
    n = 2 * half
    a = random_antisymmetric(rng, n)
    pf = pfaffian(a)
    det = np.linalg.det(a)
    assert pf ** 2 == pytest.approx(det, rel=1e-8, abs=1e-12)
    r = haar_special_orthogonal(n, rng)
    assert pfaffian(r @ a @ r.T) == pytest.approx(pf, rel=1e-7, abs=1e-12)


def test_pfaffian_batch_matches_scalar(rng):
    a = random_antisymmetric(rng, 6)[None] * np.linspace(0.1, 2, 7)[:, None, None]
    b = np.array([pfaffian(x) for x in a])
    assert np.allclose(pfaffian_batch(a), b, rtol=1e-13)
    assert pfaffian_batch(np.zeros((3, 0, 0))).tolist() == [1.0, 1.0, 1.0]


def test_haar_group_membership_and_reproducibility():
    r1 = haar_special_orthogonal(6, np.random.default_rng(5))
    r2 = haar_special_orthogonal(6, np.random.default_rng(5))
    assert np.array_equal(r1, r2)
    check_special_orthogonal(r1)
    batch = haar_special_orthogonal_batch(4, 200, np.random.default_rng(1))
    assert np.allclose(np.linalg.det(batch), 1.0, atol=1e-8)
    assert np.allclose(batch @ batch.transpose(0, 2, 1), np.eye(4), atol=1e-10)
    with pytest.raises(DimensionError):
        haar_special_orthogonal(3, np.random.default_rng(0))


def test_haar_so2_angle_uniform():
    from scipy.stats import kstest

    r = haar_special_orthogonal_batch(2, 20000, np.random.default_rng(2))
    theta = np.mod(np.arctan2(r[:, 1, 0], r[:, 0, 0]), 2 * np.pi)
    assert kstest(theta / (2 * np.pi), "uniform").pvalue > 1e-3


def test_haar_so4_moments():
    # E[O_ia] = 0, E[O_ia^2] = 1/n
    r = haar_special_orthogonal_batch(4, 10 ** 5, np.random.default_rng(3))
    mean = r.mean(axis=0)
    se = r.std(axis=0) / math.sqrt(r.shape[0])
    assert np.all(np.abs(mean) < 4 * se)
    sq = r ** 2
    se2 = sq.std(axis=0) / math.sqrt(r.shape[0])
    assert np.all(np.abs(sq.mean(axis=0) - 0.25) < 4 * se2)


def test_canonical_singular_values_block_forms():
    lam = [0.9, 0.3, 0.6]
    a = np.zeros((6, 6))
    for k, v in enumerate(lam):
        a[2 * k, 2 * k + 1], a[2 * k + 1, 2 * k] = v, -v
    assert np.allclose(canonical_singular_values(a), sorted(lam, reverse=True))
    vac = np.kron(np.eye(3), [[0, 1], [-1, 0]])
    assert np.allclose(canonical_singular_values(vac), 1.0)
    assert np.allclose(canonical_singular_values(np.zeros((4, 4))), 0.0)
    with pytest.raises(InvalidCovarianceError):
        canonical_singular_values(2 * vac)


@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_singular_values_conjugation_invariant(half, seed):
    rng = np.random.default_rng(seed)
    n = 2 * half
    a = random_antisymmetric(rng, n)
    a /= np.linalg.norm(a, 2)
    r = haar_special_orthogonal(n, rng)
    s1 = canonical_singular_values(a)
    s2 = canonical_singular_values(r @ a @ r.T)
    assert np.allclose(s1, s2, atol=1e-8)
    assert np.allclose(canonical_singular_values_batch(a[None])[0], s1, atol=1e-8)


def test_digamma_values():
    assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-12)
    assert digamma(2.0) == pytest.approx(1 - EULER_GAMMA, abs=1e-12)
    # 50-digit mpmath values
    assert digamma(10.5) == pytest.approx(2.303001034297686375272594, abs=1e-12)
    assert digamma(0.3) == pytest.approx(-3.502524222200132988964495, abs=1e-12)
    assert digamma(64.0) == pytest.approx(4.151050238804236165399371, abs=1e-12)
    with pytest.raises(DomainError):
        digamma(0.0)


@given(st.floats(0.01, 500.0))
def test_digamma_against_scipy(z):
    assert digamma(z) == pytest.approx(float(special.digamma(z)), abs=1e-12, rel=1e-13)


def test_symmetric_beta_cdf_values():
    assert symmetric_beta_cdf(0.0, 4) == 0.5
    assert symmetric_beta_cdf(1.0, 2) == 1.0
    assert symmetric_beta_cdf(-1.0, 2) == 0.0
    # adaptive quadrature of (1-u^2)^3, frozen
    assert symmetric_beta_cdf(0.5, 3) == pytest.approx(0.929443359375, abs=1e-10)
    with pytest.raises(DomainError):
        symmetric_beta_cdf(1.5, 1)
    with pytest.raises(DomainError):
        symmetric_beta_cdf(0.2, -1)


@pytest.mark.parametrize("exponent", [0, 1, 2, 5, 30])
def test_symmetric_beta_cdf_against_quadrature_and_hypergeometric(exponent):
    dens = lambda u: (1 - u * u) ** exponent  # noqa: E731
    norm = integrate.quad(dens, -1, 1)[0]
    lb = exponent + 1
    for x in (-0.93, -0.4, 0.1, 0.77):
        quad = integrate.quad(dens, -1, x, epsabs=1e-13)[0] / norm
        hyper = 0.5 + x * special.gamma(lb + 0.5) / (math.sqrt(math.pi) * special.gamma(lb)) \
            * special.hyp2f1(0.5, 1 - lb, 1.5, x * x)
        assert symmetric_beta_cdf(x, exponent) == pytest.approx(quad, abs=1e-10)
        assert symmetric_beta_cdf(x, exponent) == pytest.approx(hyper, abs=1e-10)


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=30), st.integers(0, 12))
def test_symmetric_beta_cdf_monotone(xs, exponent):
    xs = np.sort(xs)
    vals = symmetric_beta_cdf(xs, exponent)
    assert np.all(np.diff(vals) >= -1e-15)


@pytest.mark.parametrize("exponent", [0, 2, 7])
def test_cdf_integral_and_quantile(exponent):
    for x in (-0.8, 0.0, 0.35, 1.0):
        quad = integrate.quad(lambda u: symmetric_beta_cdf(u, exponent), -1, x, epsabs=1e-13)[0]
        assert symmetric_beta_cdf_integral(x, exponent) == pytest.approx(quad, abs=1e-10)
    c = np.linspace(0.01, 0.99, 9)
    assert np.allclose(symmetric_beta_cdf(symmetric_beta_quantile(c, exponent), exponent), c,
                       atol=1e-12)
