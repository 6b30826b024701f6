import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from discstable import PDS, SDS, TPDS, DS, FirstPassage, GeomPortlyStable, pmf
from discstable.errors import DomainError, InstabilityError
from discstable.pmf import (
    pmf_cf,
    pmf_first_passage,
    pmf_first_passage_vector,
    pmf_pds_gamma1,
    pmf_pds_gamma1_kummer,
    pmf_pds_gamma1_laguerre,
    pmf_pds_tempered,
    pmf_sds_asymptotic,
    pmf_sds_asymptotic_corrected,
    pmf_sds_asymptotic_simple,
    pmf_sds_gamma1,
    pmf_sds_gamma1_vector,
    pmf_sds_series,
)
from discstable.series import extract_pmf

# mpmath Taylor coefficients and quadratures, 40 digits
PDS_07_08_K3 = 0.050643567993009300756
SDS_06_05 = {0: 0.65405109757933267, 1: 0.11322856340708395, 5: 0.0033587923726550737}
SDS_05_1_KAPPA02 = {0: 0.42741593156854003, 3: 0.030778725989177068}
E_I0_1 = 0.4657596075936404365


@pytest.mark.parametrize("lam", [0.5, 1.0, 5.0])
def test_poisson_reduction(lam):
    got = pmf_pds_gamma1(lam, 0.0, 40).probs
    assert np.max(np.abs(got - stats.poisson.pmf(np.arange(41), lam))) < 1e-14


@settings(max_examples=40)
@given(st.floats(0.05, 10.0), st.floats(0.01, 0.95))
def test_pds_gamma1_head(lam, kappa):
    res = pmf_pds_gamma1(lam, kappa, 3)
    assert res[0] == pytest.approx(math.exp(-lam), rel=1e-14)
    assert res[1] == pytest.approx(math.exp(-lam) * lam * (1 - kappa), rel=1e-13)


@pytest.mark.parametrize("lam, kappa", [(0.5, 0.2), (2.0, 0.8), (1.0, 0.5)])
def test_pds_gamma1_matches_extraction(lam, kappa):
    got = pmf_pds_gamma1(lam, kappa, 40).probs
    ref = extract_pmf(PDS(1.0, lam, kappa).as_pgf(), 0, 40, tol=1e-14).coeffs
    assert np.max(np.abs(got - ref)) < 1e-11


def test_pds_gamma1_lattice():
    res = pmf_pds_gamma1(1.0, 0.3, 10, m=2)
    assert np.all(res.probs[1::2] == 0.0)
    assert res[4] == pytest.approx(pmf_pds_gamma1(1.0, 0.3, 2)[2])


def test_kummer_route_examples():
    lam, kappa = 1.3, 0.4
    base = math.exp(-lam) * lam * (1 - kappa)
    assert pmf_pds_gamma1_kummer(lam, kappa, 1) == pytest.approx(base, rel=1e-14)
    two = base * kappa * (1 - lam * (kappa - 1) / (2 * kappa))
    assert pmf_pds_gamma1_kummer(lam, kappa, 2) == pytest.approx(two, rel=1e-13)
    assert pmf_pds_gamma1(lam, kappa, 2)[2] == pytest.approx(two, rel=1e-13)


@settings(max_examples=40)
@given(st.floats(0.1, 5.0), st.floats(0.05, 0.95), st.integers(1, 30))
def test_kummer_laguerre_agree(lam, kappa, k):
    a = pmf_pds_gamma1_kummer(lam, kappa, k)
    b = pmf_pds_gamma1_laguerre(lam, kappa, k)
    assert abs(a - b) < 1e-11


def test_sds_bessel_examples():
    assert pmf_sds_gamma1(1.0, 0) == pytest.approx(E_I0_1, abs=1e-15)
    for k in range(1, 12):
        assert pmf_sds_gamma1(2.0, k) == pmf_sds_gamma1(2.0, -k)


def test_sds_bessel_vector_matches_inversion():
    got = pmf_sds_gamma1_vector(3.0, -30, 30).probs
    ref = pmf_cf(SDS(1.0, 3.0), -30, 30, tol=1e-13).probs
    assert np.max(np.abs(got - ref)) < 1e-10
    assert np.allclose(got, special.ive(np.arange(-30, 31), 3.0), atol=1e-15)


def test_sds_series_examples():
    v = pmf_sds_series(1.0, 1.0, 0)
    assert v.value == pytest.approx(E_I0_1, abs=1e-8)
    for k, ref in SDS_06_05.items():
        assert pmf_sds_series(0.6, 0.5, k).value == pytest.approx(ref, abs=1e-7)
    assert pmf_sds_series(0.6, 0.5, 1).value == pytest.approx(pmf_cf(SDS(0.6, 0.5), 1, 1)[1], abs=1e-7)


def test_sds_series_tiny_lambda_far_k():
    assert abs(pmf_sds_series(0.5, 1e-6, 40).value) < 1e-8


def test_sds_series_rejects_large_lambda():
    with pytest.raises(InstabilityError):
        pmf_sds_series(0.5, 100.0, 0)


def test_sds_kappa_via_inversion():
    res = pmf(SDS(0.5, 1.0, 0.2), -5, 5)
    for k, ref in SDS_05_1_KAPPA02.items():
        assert res[k] == pytest.approx(ref, abs=1e-10)
        assert res[-k] == pytest.approx(ref, abs=1e-10)


def test_first_passage_examples():
    assert pmf_first_passage(1, 1, 1) == pytest.approx(0.5, abs=1e-15)
    assert pmf_first_passage(1, 1, 3) == pytest.approx(0.125, abs=1e-15)
    assert pmf_first_passage(1, 1, 2) == 0.0
    assert pmf_first_passage(1, 1, -1) == 0.0


def test_first_passage_two_fold():
    got = pmf_first_passage_vector(2, 1, 60).probs
    assert got[:9] == pytest.approx([0, 0, 0.25, 0, 0.125, 0, 0.078125, 0, 0.0546875], abs=1e-15)
    ref = extract_pmf(FirstPassage(2, 1).as_pgf(), 0, 60, tol=1e-13, radius=0.95).coeffs
    assert np.max(np.abs(got - ref)) < 1e-11


def test_tempered_examples():
    lam = 1.3
    assert pmf_pds_tempered(0.5, lam, 0) == pytest.approx(math.exp(-lam))
    # E Y = γ θ^{γ-1} with θ = λ^{1/γ}; at λ = 1 this gives e^{-1}/2
    assert pmf_pds_tempered(0.5, 1.0, 1) == pytest.approx(0.5 * math.exp(-1), rel=1e-14)
    assert pmf_pds_tempered(0.7, 0.8, 3) == pytest.approx(PDS_07_08_K3, rel=1e-10)
    ref = pmf_cf(PDS(0.7, 0.8), 3, 3, tol=1e-12)[3]
    assert pmf_pds_tempered(0.7, 0.8, 3) == pytest.approx(ref, rel=1e-8)


@settings(max_examples=20)
@given(st.floats(0.2, 0.95), st.floats(0.2, 3.0), st.integers(0, 8))
def test_tempered_matches_extraction(gamma, lam, k):
    ref = extract_pmf(PDS(gamma, lam).as_pgf(), 0, 8, tol=1e-13, radius=0.5)[k]
    assert pmf_pds_tempered(gamma, lam, k) == pytest.approx(ref, rel=1e-7, abs=1e-13)


def test_asymptotic_term_vanishes_when_gamma_j_integer():
    # γ = 0.5: the j = 2 sine is zero, so 2 and 3 terms differ only through j = 3
    a2 = pmf_sds_asymptotic(0.5, 1.0, 60, 1).value
    b2 = pmf_sds_asymptotic(0.5, 1.0, 60, 2).value
    assert a2 == b2


def test_expansions_differ_at_stated_order():
    # 2^n |beta form - power form| decays like n^{-γ-2}
    gamma = 0.5
    ns = np.array([50, 100, 200, 400])
    diff = [
        2.0**n * abs(pmf_sds_asymptotic(gamma, 1.0, int(n), 3).value
                     - pmf_sds_asymptotic_simple(gamma, 1.0, int(n)).value)
        for n in ns
    ]
    slope = np.polyfit(np.log(ns), np.log(diff), 1)[0]
    assert slope == pytest.approx(-(gamma + 2), abs=0.05)


def test_corrected_expansion_tracks_exact_pmf():
    exact = pmf_cf(SDS(0.5, 1.0), 0, 200, tol=1e-13)
    errors = [abs(pmf_sds_asymptotic_corrected(0.5, 1.0, n).value / exact[n] - 1) for n in (50, 100, 200)]
    assert max(errors) < 1e-6


def test_asymptotic_domain():
    with pytest.raises(DomainError):
        pmf_sds_asymptotic(1.0, 1.0, 50, 2)
    with pytest.raises(DomainError):
        pmf_sds_asymptotic(0.5, 1.0, 2, 10)


@pytest.mark.parametrize(
    "dist, lo, hi",
    [
        (PDS(0.7, 1.0, 0.3), 0, 30),
        (SDS(0.6, 0.5), -10, 10),
        (DS(0.8, 0.5, 1.0, 0.7, 0.2), -10, 10),
        (TPDS(1.5, 1.0), 0, 20),
        (GeomPortlyStable(0.6, 1.0), -20, 0),
        (FirstPassage(2, 1), 0, 30),
    ],
    ids=lambda x: getattr(x, "family", str(x)),
)
def test_pmf_dispatch_nonnegative_and_bounded(dist, lo, hi):
    res = pmf(dist, lo, hi)
    assert res.probs.min() >= -1e-12
    assert res.probs.sum() <= 1 + 1e-9
    assert res.method in ("closed_form", "cf_inversion")
    assert list(res.ks) == list(range(lo, hi + 1))


def test_pmf_dispatch_methods():
    assert pmf(PDS(1.0, 1.0, 0.3), 0, 5).method == "closed_form"
    assert pmf(SDS(1.0, 1.0), -3, 3).method == "closed_form"
    assert pmf(PDS(0.5, 1.0), 0, 5).method == "cf_inversion"
    assert pmf(PDS(0.7, 1.0), 0, 5)[0] == pytest.approx(math.exp(-1), abs=1e-10)
    with pytest.raises(DomainError):
        pmf(PDS(0.5, 1.0), 5, 1)
