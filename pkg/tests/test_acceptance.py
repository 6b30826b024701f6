"""Acceptance checks, one test per criterion; the summary is printed by conftest."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import special, stats

from discstable import PDS, SDS, TPDS, DS, FirstPassage, GeomPortlyStable, RandomStream, pmf
from discstable.moments import factorial_moment_pds, factorial_moment_sds, fractional_moment_sds
from discstable.pmf import (
    pmf_cf,
    pmf_pds_gamma1,
    pmf_pds_gamma1_kummer,
    pmf_pds_gamma1_laguerre,
    pmf_sds_asymptotic_corrected,
    pmf_sds_asymptotic_simple,
)
from discstable.sampler import sample_ds, sample_pds, sample_positive_stable, sample_sds, sample_tpds
from discstable.series import extract_pmf, numeric_factorial_moment
from discstable.thinning import Bernoulli, ChebyshevPortly, ChebyshevThin, ModGeometric
from discstable.verify import (
    LIMIT_RULES,
    oracle_pmf,
    standard_limit_spec,
    tv_distance,
    verify_attraction,
    verify_commutativity,
    verify_first_sense,
    verify_limit,
    verify_second_sense,
    verify_tail_constant,
    verify_third_sense,
)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False


def _check_budget(b, note):
    note(f"{b.elapsed:.2f}s of {b.seconds:g}s")
    assert b.elapsed < b.seconds


STABILITY_FAMILIES = (
    [PDS(g, 1.0, k) for g in (0.3, 0.5, 0.8, 1.0) for k in (0.0, 0.4)]
    + [TPDS(g, 1.0, b) for g in (0.5, 1.0, 1.8) for b in (0.0, 0.3)]
)


def test_criterion_01_poisson_reduction(note):
    with Budget(1.0) as b:
        worst = 0.0
        for lam in (0.5, 1.0, 5.0):
            got = np.asarray(pmf(PDS(1.0, lam, 0.0), 0, 40).probs)
            ref = stats.poisson.pmf(np.arange(41), lam)
            worst = max(worst, float(np.max(np.abs(got - ref))))
    note(f"max abs err {worst:.2e}")
    assert worst < 1e-12
    _check_budget(b, note)


def test_criterion_02_bessel_identity(note):
    with Budget(5.0) as b:
        worst = 0.0
        ks = np.arange(-30, 31)
        for lam in (0.5, 1.0, 3.0):
            got = np.asarray(pmf_cf(SDS(1.0, lam), -30, 30).probs)
            worst = max(worst, float(np.max(np.abs(got - special.ive(ks, lam)))))
    note(f"max abs err {worst:.2e}")
    assert worst < 1e-10
    _check_budget(b, note)


def test_criterion_03_first_sense_stability(note):
    with Budget(10.0) as b:
        reps = [verify_first_sense(d) for d in STABILITY_FAMILIES]
    worst = max(r.max_abs_residual for r in reps)
    note(f"{len(reps)} laws, max residual {worst:.2e}")
    assert worst < 1e-12
    _check_budget(b, note)


def test_criterion_04_second_sense_identities(note):
    with Budget(2.0) as b:
        reps = [verify_second_sense(FirstPassage(M, m), ChebyshevPortly) for M, m in ((1, 1), (2, 1), (1, 2), (3, 2))]
        reps += [verify_second_sense(GeomPortlyStable(g, lam)) for g in (0.4, 0.7, 1.0) for lam in (0.5, 2.0)]
    worst = max(r.max_abs_residual for r in reps)
    note(f"max residual {worst:.2e}")
    assert worst < 1e-12
    _check_budget(b, note)


def test_criterion_05_third_sense_identity(note):
    with Budget(5.0) as b:
        reps = []
        for d in STABILITY_FAMILIES:
            g = d.gamma
            splits = [(0.9 * 2 ** (-1 / g),) * 2, (0.3 ** (1 / g), 0.5 ** (1 / g))]
            reps += [verify_third_sense(d, None, p1, p2) for p1, p2 in splits]
        for n1, n2 in ((1, 1), (2, 3), (1, 4)):
            reps.append(verify_third_sense(FirstPassage(2, 1), ChebyshevPortly, n1, n2))
    assert all(r.details["feasible"] for r in reps)
    worst = max(r.max_abs_residual for r in reps)
    note(f"{len(reps)} checks, max residual {worst:.2e}")
    assert worst < 1e-12
    _check_budget(b, note)


def test_criterion_06_semigroup_commutativity(note):
    rng = np.random.default_rng(20240601)
    with Budget(2.0) as b:
        unit = lambda: [tuple(rng.uniform(0.01, 0.99, 2)) for _ in range(5)]
        reps = [
            verify_commutativity(Bernoulli, unit()),
            verify_commutativity(ModGeometric, unit(), kappa=float(rng.uniform(0, 0.9))),
            verify_commutativity(ChebyshevThin, unit(), b=float(rng.uniform(-0.9, 0.9))),
            verify_commutativity(ChebyshevPortly, [tuple(int(v) for v in rng.integers(1, 7, 2)) for _ in range(5)]),
        ]
    worst = max(r.max_abs_residual for r in reps)
    note(f"max residual {worst:.2e}")
    assert worst < 1e-12
    _check_budget(b, note)


def test_criterion_07_closed_form_cross_agreement(note):
    with Budget(2.0) as b:
        routes = series = 0.0
        for lam in (0.5, 2.0):
            for kappa in (0.2, 0.8):
                direct = np.asarray(pmf_pds_gamma1(lam, kappa, 30).probs)
                # Both special-function routes cover k >= 1; P(0) = exp(-lam) has no hypergeometric part.
                kummer = np.array([pmf_pds_gamma1_kummer(lam, kappa, k) for k in range(1, 31)])
                laguerre = np.array([pmf_pds_gamma1_laguerre(lam, kappa, k) for k in range(1, 31)])
                ref = np.asarray(extract_pmf(PDS(1.0, lam, kappa).as_pgf(), 0, 30, tol=1e-14).coeffs)
                routes = max(routes, float(np.max(np.abs(direct[1:] - kummer))),
                             float(np.max(np.abs(direct[1:] - laguerre))))
                series = max(series, float(np.max(np.abs(direct - ref))))
    note(f"routes {routes:.2e}, series oracle {series:.2e}")
    assert routes < 1e-11
    assert series < 1e-10
    _check_budget(b, note)


def test_criterion_08_moments(note):
    with Budget(60.0) as b:
        worst = 0.0
        for lam in (0.5, 1.0, 2.0):
            for kappa in (0.0, 0.3, 0.6):
                for n in range(1, 6):
                    for cls, closed in ((PDS, factorial_moment_pds), (SDS, factorial_moment_sds)):
                        ref = numeric_factorial_moment(cls(1.0, lam, kappa).as_pgf(), n)
                        # Odd symmetric moments vanish, so the scale is floored at 1.
                        worst = max(worst, abs(closed(lam, kappa, n) - ref) / max(abs(ref), 1.0))
        n_mc = 10**6
        x = sample_sds(0.5, 1.0, 0.0, rng=RandomStream(8, 0), size=n_mc)
        w = np.abs(x).astype(float) ** 0.2
        mc, se = w.mean(), w.std(ddof=1) / math.sqrt(n_mc)
        exact = fractional_moment_sds(0.5, 1.0, 0.0, 0.2).value
        flags = [fractional_moment_sds(0.5, 1.0, 0.0, r, at_one="limit").infinite for r in (1.0, 1.3, 1.9)]
    z = (mc - exact) / se
    note(f"factorial rel err {worst:.1e}, MC z {z:+.2f}")
    assert worst < 1e-6
    assert abs(z) < 3.0
    assert all(flags)
    _check_budget(b, note)


LAPLACE_PAIRS = [(u, g) for g in (0.3, 0.5, 0.7, 0.9) for u in (0.5, 1.0, 2.0)]


@pytest.mark.slow
def test_criterion_09_samplers(note):
    n = 10**6
    cases = [
        ("pds", PDS(0.7, 1.0, 0.3), lambda r: sample_pds(0.7, 1.0, 0.3, rng=r, size=n)),
        ("sds", SDS(0.6, 1.0, 0.2), lambda r: sample_sds(0.6, 1.0, 0.2, rng=r, size=n)),
        ("ds", DS(0.8, 0.5, 1.0, 0.7, 0.2), lambda r: sample_ds(0.8, 0.5, 1.0, 0.7, 0.2, rng=r, size=n)),
        ("tpds", TPDS(1.0, 1.0, 0.0), lambda r: sample_tpds(1.0, 1.0, 0.0, rng=r, size=n)),
    ]
    ideal = np.random.default_rng(99)
    tvs = {}
    with Budget(300.0) as b:
        for i, (name, dist, draw) in enumerate(cases):
            oracle = oracle_pmf(dist)
            tv = tv_distance(draw(RandomStream(9, i)), oracle)
            # TV of an exact sampler at the same N: the floor set by sampling noise.
            probs = np.append(np.asarray(oracle.coeffs, float), max(0.0, 1.0 - oracle.total()))
            floor = 0.5 * float(np.abs(ideal.multinomial(n, probs / probs.sum()) / n - probs).sum())
            tvs[name] = tv
            note(f"{name} TV {tv:.4f} (exact-sampler TV {floor:.4f})")
        laplace_bad = []
        for j, (u, g) in enumerate(LAPLACE_PAIRS):
            w = np.exp(-u * sample_positive_stable(g, RandomStream(10, j), size=n))
            if abs(w.mean() - math.exp(-(u**g))) >= 4 * w.std() / math.sqrt(n):
                laplace_bad.append((u, g))
    note(f"Laplace failures {laplace_bad}")
    assert not laplace_bad
    assert all(tv < 0.015 for tv in tvs.values()), tvs
    _check_budget(b, note)


def test_criterion_10_limits_and_attraction(note):
    with Budget(60.0) as b:
        theorems = {r: verify_limit(standard_limit_spec(r)) for r, v in LIMIT_RULES.items() if v.level == "theorem"}
        remark = {r: verify_limit(standard_limit_spec(r)) for r, v in LIMIT_RULES.items() if v.level != "theorem"}
        attraction = {
            d.family: verify_attraction(d) for d in (PDS(0.5, 1.0), SDS(0.5, 1.0), FirstPassage(1, 1))
        }
    for label, group in (("theorem", theorems), ("remark", remark), ("attraction", attraction)):
        for name, rep in group.items():
            sched = [r for _, r in rep.details["schedule"]]
            status = "ok" if rep.passed else "FAIL"
            note(f"{label} {name} {status} final {sched[-1]:.3g}")
    failed = [n for n, r in {**theorems, **attraction}.items() if not (r.passed and r.details["monotone"])]
    assert not failed, failed
    _check_budget(b, note)


def test_criterion_11_tail_constant(note):
    with Budget(60.0) as b:
        reps = [verify_tail_constant(g, 1.0, 0.0) for g in (0.5, 0.4)]
    for g, rep in zip((0.5, 0.4), reps):
        errs = [e for _, e in rep.details["schedule"]]
        note(f"gamma {g}: rel err " + ", ".join(f"{e:.3f}" for e in errs))
    assert all(r.passed and r.details["monotone"] for r in reps)
    _check_budget(b, note)


def test_criterion_12_asymptotic_pmf(note):
    with Budget(30.0) as b:
        dist = SDS(0.5, 1.0)
        ns = (50, 100, 200)
        exact = [pmf_cf(dist, n, n, tol=1e-13).probs[0] for n in ns]
        ratio = [pmf_sds_asymptotic_simple(0.5, 1.0, n).value / e for n, e in zip(ns, exact)]
        corrected = [pmf_sds_asymptotic_corrected(0.5, 1.0, n).value / e for n, e in zip(ns, exact)]
    note("ratio " + ", ".join(f"{r:.3g}" for r in ratio))
    note("corrected ratio " + ", ".join(f"{r:.9f}" for r in corrected))
    errs = [abs(r - 1.0) for r in ratio]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.05
    _check_budget(b, note)


CLI = [sys.executable, "-m", "discstable"]


def test_criterion_13_cli_contract(note):
    with Budget(10.0) as b:
        pmf_argv = CLI + ["pmf", "--family", "SDS", "--gamma", "1", "--lambda", "1", "--k-range", "-10", "10",
                          "--format", "csv"]
        p = subprocess.run(pmf_argv, capture_output=True, text=True)
        rows = [line.split(",") for line in p.stdout.splitlines()[1:]]
        probs = np.array([float(v) for _, v in rows])
        ks = np.array([int(k) for k, _ in rows])

        sample_argv = CLI + ["sample", "--family", "PDS", "--gamma", "0.7", "--lambda", "1", "--kappa", "0.3",
                             "--n", "1000", "--seed", "42"]
        s1 = subprocess.run(sample_argv, capture_output=True)
        s2 = subprocess.run(sample_argv, capture_output=True)

        verify_argv = CLI + ["verify", "--suite", "first-sense", "--family", "PDS", "--gamma", "0.5",
                             "--lambda", "1", "--kappa", "0.2"]
        v = subprocess.run(verify_argv, capture_output=True, text=True)
        bad = subprocess.run(CLI + ["pmf", "--family", "PDS", "--gamma", "2", "--lambda", "1", "--k-range", "0", "1"],
                             capture_output=True, text=True)
    note(f"exit codes {p.returncode}/{s1.returncode}/{v.returncode}, bad params {bad.returncode}")
    assert p.returncode == 0 and p.stdout.splitlines()[0] == "k,p_k" and len(rows) == 21
    assert np.max(np.abs(probs - special.ive(ks, 1.0))) < 1e-12
    assert s1.returncode == s2.returncode == 0 and s1.stdout == s2.stdout
    assert v.returncode == 0 and '"passed": true' in v.stdout
    assert bad.returncode == 1 and "gamma must lie in (0,1] for family PDS" in bad.stderr
    _check_budget(b, note)
