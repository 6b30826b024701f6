import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discstable import DS, PDS, SDS, TPDS, Degenerate, FirstPassage, GeomPortlyStable
from discstable.errors import DomainError, FamilyMismatchError
from discstable.thinning import (
    Bernoulli,
    ChebyshevPortly,
    ChebyshevThin,
    GeometricPortly,
    ModGeometric,
)
from discstable.verify import (
    LIMIT_RULES,
    LimitSpec,
    VerificationReport,
    attraction_table,
    circle_grid,
    default_t_grid,
    limit_table,
    one_sided_grid,
    oracle_pmf,
    standard_limit_spec,
    tail_constant,
    verify_attraction,
    verify_commutativity,
    verify_first_sense,
    verify_infinite_divisibility,
    verify_limit,
    verify_mixture_characterization,
    verify_second_sense,
    verify_third_sense,
)


def test_grids():
    z = one_sided_grid()
    assert z.size == 64 and z.min() == pytest.approx(0.01) and z.max() == pytest.approx(1.0)
    assert np.allclose(np.abs(circle_grid()), 1.0)
    t = default_t_grid()
    assert t.size == 201 and t[0] == -5.0 and t[-1] == 5.0


def test_report_serialises():
    rep = VerificationReport("x", {"a": np.float64(1.5)}, "g", math.inf, 1e-12, {"r": [1.0, math.nan]})
    assert rep.passed is False
    d = json.loads(json.dumps(rep.to_dict(), allow_nan=False))
    assert d["max_abs_residual"] == "inf" and d["details"]["r"] == [1.0, "nan"]
    assert set(d) >= {"identity", "params", "grid", "max_abs_residual", "tolerance", "passed"}


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 10.0), st.floats(0.0, 0.95))
def test_first_sense_pds(gamma, lam, kappa):
    rep = verify_first_sense(PDS(gamma, lam, kappa), ModGeometric)
    assert rep.passed, rep.details
    assert rep.details["residual_by_n"][2] < 1e-12


def test_first_sense_n_one_exact():
    assert verify_first_sense(PDS(0.5, 1.0, 0.2), n_set=[1]).max_abs_residual == 0.0


def test_first_sense_tpds():
    assert verify_first_sense(TPDS(1.5, 1.0, 0.0), ChebyshevThin).passed
    assert verify_first_sense(TPDS(0.7, 2.0, -0.4)).passed


def test_first_sense_residual_does_not_grow():
    by_n = verify_first_sense(PDS(0.3, 1.0, 0.4)).details["residual_by_n"]
    assert max(by_n.values()) < 1e-12


def test_first_sense_wrong_pairing():
    with pytest.raises(FamilyMismatchError):
        verify_first_sense(PDS(0.5, 1.0), ChebyshevThin)
    with pytest.raises(FamilyMismatchError):
        verify_first_sense(SDS(0.5, 1.0))


def test_second_sense():
    assert verify_second_sense(Degenerate()).max_abs_residual <= 4 * np.finfo(float).eps
    for m in (1, 2):
        rep = verify_second_sense(FirstPassage(1, m), ChebyshevPortly)
        assert rep.passed, rep.details
    rep = verify_second_sense(GeomPortlyStable(0.6, 1.0), GeometricPortly)
    assert rep.passed


def test_second_sense_wrong_pairing():
    with pytest.raises(FamilyMismatchError):
        verify_second_sense(PDS(0.5, 1.0))
    with pytest.raises(FamilyMismatchError):
        verify_second_sense(FirstPassage(), GeometricPortly)


@pytest.mark.parametrize("gamma", [0.3, 0.5, 0.8, 1.0])
def test_third_sense_pds(gamma):
    p = 2 ** (-1 / gamma)
    rep = verify_third_sense(PDS(gamma, 1.0, 0.4), ModGeometric, p, p)
    assert rep.passed and rep.params["p"] == pytest.approx(1.0)


def test_third_sense_first_passage():
    rep = verify_third_sense(FirstPassage(), ChebyshevPortly, 1, 1)
    assert rep.passed and rep.params["n"] == 2
    assert verify_third_sense(FirstPassage(2, 1), None, 2, 3).passed
    with pytest.raises(DomainError):
        verify_third_sense(FirstPassage(), None, 1.5, 1)


def test_third_sense_degenerate_split():
    # p2^γ far below rounding keeps p = 1; Q_{p2} collapses to the identity at 1
    rep = verify_third_sense(PDS(0.6, 1.0, 0.2), None, 1.0, 1e-30)
    assert rep.details["feasible"] and rep.max_abs_residual < 1e-12


def test_third_sense_infeasible():
    rep = verify_third_sense(PDS(0.5, 1.0), None, 0.9, 0.9)
    assert not rep.passed and rep.details["feasible"] is False


def test_commutativity():
    pairs = [(0.3, 0.7), (0.2, 0.9)]
    assert verify_commutativity(Bernoulli, pairs).max_abs_residual < 1e-15
    assert verify_commutativity(ModGeometric, [(0.3, 0.7)], kappa=0.5).max_abs_residual < 1e-13
    assert verify_commutativity(ChebyshevThin, [(0.5, 0.25)], b=0.0).passed
    assert verify_commutativity(ChebyshevPortly, [(2, 3), (4, 5)]).passed


@pytest.mark.parametrize(
    "dist", [PDS(0.5, 1.0, 0.3), DS(0.6, 0.3, 1.0, 0.7, 0.2), SDS(0.5, 2.0, 0.3), TPDS(1.2, 1.0, 0.2)],
    ids=lambda d: d.family,
)
def test_infinite_divisibility(dist):
    assert verify_infinite_divisibility(dist).max_abs_residual < 1e-13


@pytest.mark.parametrize("rule", ["pds_kappa", "pds_lambda", "sds_kappa", "sds_lambda", "tpds_sigma"])
def test_limit_rules_converge(rule):
    rep = verify_limit(standard_limit_spec(rule))
    assert rep.details["monotone"] and rep.passed, rep.details["schedule"]
    assert rep.details["level"] == "theorem"


def test_limit_residual_zero_at_origin():
    for rule in LIMIT_RULES:
        rows = limit_table(standard_limit_spec(rule), t_grid=[0.0])
        assert all(r == 0.0 for _, r in rows), rule


def test_limit_spec_validation():
    with pytest.raises(DomainError):
        LimitSpec("nope", {})
    with pytest.raises(DomainError):
        LimitSpec("pds_kappa", {"gamma": 0.5})
    with pytest.raises(DomainError):
        LimitSpec("pds_kappa", {"gamma": 0.5, "lam": 1.0, "c": 1.0}, a=(0.1, 0.2))


def test_remark_level_label():
    assert LIMIT_RULES["ds_drift"].level == "remark-level"
    assert verify_limit(standard_limit_spec("ds_drift")).details["level"] == "remark-level"


@pytest.mark.parametrize("dist", [PDS(0.5, 1.0), SDS(0.5, 1.0), FirstPassage()], ids=lambda d: d.family)
def test_attraction(dist):
    rep = verify_attraction(dist)
    assert rep.passed, rep.details["schedule"]
    assert attraction_table(dist, t_grid=[0.0])[0][1] == 0.0


def test_attraction_unsupported():
    with pytest.raises(DomainError):
        verify_attraction(PDS(1.0, 1.0))


def test_tail_constant_values():
    assert tail_constant(0.5, 1.0) == pytest.approx(math.sqrt(0.5) * 2 / math.pi, rel=1e-15)
    # mpmath, 40 digits
    assert tail_constant(0.4, 1.0) == pytest.approx(0.53421137284966107, rel=1e-14)
    assert tail_constant(0.4, 2.0) == pytest.approx(2 * tail_constant(0.4, 1.0))
    with pytest.raises(DomainError):
        tail_constant(1.0, 1.0)


def test_mixture_analytic():
    rep = verify_mixture_characterization(0.4, 0.7, 1.0, 0.3)
    assert rep.passed and rep.max_abs_residual < 1e-13
    assert verify_mixture_characterization(0.5, 0.5, 2.0).max_abs_residual < 1e-14


def test_mixture_monte_carlo():
    rep = verify_mixture_characterization(0.4, 0.8, 1.0, 0.0, method="monte_carlo", seed=3)
    assert rep.passed and rep.details["p_value"] > 0.001
    again = verify_mixture_characterization(0.4, 0.8, 1.0, 0.0, method="monte_carlo", seed=3)
    assert again.max_abs_residual == rep.max_abs_residual
    with pytest.raises(DomainError):
        verify_mixture_characterization(0.8, 0.4, 1.0)


def test_oracle_pmf_mass():
    o = oracle_pmf(PDS(0.7, 1.0, 0.3))
    assert o.total() >= 0.999 and o.coeffs.min() >= -1e-12
    s = oracle_pmf(SDS(0.6, 1.0, 0.2))
    assert s.total() >= 0.999 and s.k_min == -s.k_max
