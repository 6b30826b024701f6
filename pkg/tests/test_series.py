import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from discstable import DS, PDS, SDS, RandomStream, sample
from discstable.errors import DomainError, DomainEscapeError
from discstable.series import (
    AnalyticPgf,
    LaurentSeries,
    cf_eval,
    compose,
    extract_pmf,
    identity_pgf,
    numeric_factorial_moment,
    pmf_from_cf,
    principal_power,
)
from discstable.thinning import Bernoulli, ModGeometric


def poisson_pgf(lam):
    return AnalyticPgf(lambda z: np.exp(lam * (z - 1.0)), "nonnegative", 1, math.inf, "poisson")


def test_extract_poisson():
    res = extract_pmf(poisson_pgf(1.0), 0, 8)
    expected = [math.exp(-1) / math.factorial(k) for k in range(9)]
    assert np.allclose(res.coeffs, expected, atol=1e-14)
    assert res.aliasing_error <= 1e-8


def test_extract_degenerate():
    res = extract_pmf(identity_pgf(), 0, 10)
    assert res[1] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.delete(res.coeffs, 1) == 0.0)


def test_extract_two_sided_window():
    pgf = SDS(1.0, 1.0).as_pgf()
    res = extract_pmf(pgf, -6, 6)
    assert np.allclose(res.coeffs, special.ive(np.arange(-6, 7), 1.0), atol=1e-13)


def test_extract_radius_only_for_one_sided():
    with pytest.raises(DomainError):
        extract_pmf(SDS(1.0, 1.0).as_pgf(), -3, 3, radius=0.9)
    with pytest.raises(DomainError):
        extract_pmf(poisson_pgf(1.0), 3, 1)


def test_extract_pds_against_monte_carlo():
    res = extract_pmf(PDS(0.7, 1.0, 0.3).as_pgf(), 0, 40)
    n = 200_000
    draws = sample(PDS(0.7, 1.0, 0.3), n, RandomStream(11)).values
    freq = np.bincount(draws[draws <= 40], minlength=41) / n
    se = np.sqrt(res.coeffs * (1 - res.coeffs) / n)
    z = np.abs(freq - res.coeffs) / np.maximum(se, 1e-12)
    # Bonferroni over 41 cells at the 0.001 level
    assert z.max() < stats.norm.isf(0.0005 / 41)


def test_laurent_series_access():
    s = LaurentSeries(-2, np.array([0.1, 0.2, 0.4, 0.2, 0.1]))
    assert s.k_max == 2
    assert list(s.ks) == [-2, -1, 0, 1, 2]
    assert s[0] == 0.4 and s[7] == 0.0
    assert s.total() == pytest.approx(1.0)
    assert list(s.window(1, 3)) == [0.2, 0.1, 0.0]


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_compose_bernoulli(p1, p2):
    z = np.linspace(-1, 1, 17)
    composed = compose(Bernoulli(p1).as_pgf(), Bernoulli(p2).as_pgf())
    assert np.allclose(composed(z), Bernoulli(p1 * p2).pgf(z), atol=1e-15)


def test_compose_identity():
    q = ModGeometric(0.4, 0.3).as_pgf()
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 33))
    assert np.allclose(compose(identity_pgf(), q)(z), q(z), atol=0)


@settings(max_examples=30)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.0, 0.9))
def test_compose_modgeo_commutes(p1, p2, kappa):
    a, b = ModGeometric(p1, kappa).as_pgf(), ModGeometric(p2, kappa).as_pgf()
    z = np.linspace(0.0, 1.0, 33)
    assert np.max(np.abs(compose(a, b)(z) - compose(b, a)(z))) < 1e-13


def test_compose_rejects_escape():
    # fixes z = 1 but maps z = -1 to -3
    outward = AnalyticPgf(lambda z: 2.0 * z - 1.0, "nonnegative", 1, math.inf, "affine")
    with pytest.raises(DomainEscapeError):
        compose(identity_pgf(), outward)


def test_cf_eval():
    assert cf_eval(poisson_pgf(2.0), 0.0) == pytest.approx(1.0)
    t = np.linspace(-3, 3, 13)
    assert np.allclose(cf_eval(poisson_pgf(2.0), t), np.exp(2.0 * (np.exp(1j * t) - 1)))
    sds = SDS(1.0, 1.5).as_pgf()
    assert np.allclose(cf_eval(sds, t), np.exp(-1.5 * (1 - np.cos(t))), atol=1e-14)


def test_numeric_factorial_moment_poisson():
    assert numeric_factorial_moment(poisson_pgf(1.7), 2) == pytest.approx(1.7**2, rel=1e-10)


@pytest.mark.parametrize("lam, kappa", [(1.0, 0.0), (0.5, 0.4), (2.0, 0.8)])
def test_numeric_factorial_moment_pds_mean(lam, kappa):
    got = numeric_factorial_moment(PDS(1.0, lam, kappa).as_pgf(), 1)
    assert got == pytest.approx(lam / (1 - kappa), rel=1e-9)


def test_numeric_factorial_moment_needs_analyticity():
    with pytest.raises(DomainError):
        numeric_factorial_moment(PDS(0.5, 1.0).as_pgf(), 1)


def test_pmf_from_cf_constant():
    res = pmf_from_cf(lambda t: np.ones_like(t, dtype=complex), -3, 3)
    assert res[0] == pytest.approx(1.0, abs=1e-15)
    assert sum(abs(res[k]) for k in (-3, -2, -1, 1, 2, 3)) < 1e-14


def test_pmf_from_cf_bessel():
    res = pmf_from_cf(SDS(1.0, 1.0).char_fn, -20, 20)
    assert np.allclose(res.coeffs, special.ive(np.arange(-20, 21), 1.0), atol=1e-14)


def test_pmf_from_cf_ds_normalised():
    # Mass outside [-K, K] decays like K^{-γ}; the window deficit must follow that law.
    d = DS(0.8, 0.5, 1.0, 0.7, 0.2)
    deficits = []
    for k in (4000, 16000):
        res = pmf_from_cf(d.char_fn, -k, k, tol=1e-11)
        assert res.coeffs.min() >= -1e-8
        assert res.total() <= 1.0 + 1e-9
        deficits.append(1.0 - res.total())
    assert deficits[0] / deficits[1] == pytest.approx(4**0.8, rel=0.05)


def test_extract_and_cf_agree():
    d = PDS(0.6, 1.0, 0.2)
    a = extract_pmf(d.as_pgf(), 0, 30, tol=1e-13, radius=0.9)
    b = pmf_from_cf(d.char_fn, 0, 30, tol=1e-11)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-10


def test_principal_power_branch():
    w = np.array([1.0, 1j, -1j, 0.0])
    out = principal_power(w, 0.5)
    assert np.allclose(out, [1.0, np.exp(1j * np.pi / 4), np.exp(-1j * np.pi / 4), 0.0])
