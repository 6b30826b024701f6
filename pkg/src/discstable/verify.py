"""Numerical certification of stability identities, limits and tail constants.

Every check returns a :class:`VerificationReport`; ``passed`` is always
``max_abs_residual < tolerance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import special, stats

from .distributions import (
    DS,
    PDS,
    SDS,
    TPDS,
    Degenerate,
    DiscreteStableDist,
    FirstPassage,
    GeomPortlyStable,
)
from .errors import DomainError, FamilyMismatchError
from .pmf import pmf, pmf_cf
from .sampler import RandomStream, sample_positive_stable
from .series import LaurentSeries, extract_pmf
from .thinning import (
    Bernoulli,
    ChebyshevPortly,
    ChebyshevThin,
    DegeneratePortly,
    GeometricPortly,
    ModGeometric,
    ThinningOp,
)

__all__ = [
    "VerificationReport",
    "LimitSpec",
    "LIMIT_RULES",
    "one_sided_grid",
    "circle_grid",
    "default_z_grid",
    "default_t_grid",
    "verify_first_sense",
    "verify_second_sense",
    "verify_third_sense",
    "verify_commutativity",
    "verify_infinite_divisibility",
    "verify_limit",
    "limit_table",
    "standard_limit_spec",
    "verify_attraction",
    "attraction_table",
    "tail_constant",
    "verify_tail_constant",
    "verify_mixture_characterization",
    "oracle_pmf",
    "tv_distance",
]

DEFAULT_A = (0.1, 0.05, 0.025, 0.0125)
DEFAULT_N = tuple(2**k for k in range(1, 15))
P_THRESHOLD = 0.001
ROUNDING_FLOOR = 1e-12


@dataclass(frozen=True)
class VerificationReport:
    identity: str
    params: dict[str, Any]
    grid: str
    max_abs_residual: float
    tolerance: float
    passed: bool = field(init=False)
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "passed", bool(self.max_abs_residual < self.tolerance))

    def to_dict(self) -> dict[str, Any]:
        return {
            "identity": self.identity,
            "params": _jsonable(self.params),
            "grid": self.grid,
            "max_abs_residual": _num(self.max_abs_residual),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": _jsonable(self.details),
        }


def _num(x: float):
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "nan")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


# --- grids --------------------------------------------------------------------


def one_sided_grid(n: int = 64, lo: float = 0.01, hi: float = 1.0) -> np.ndarray:
    """Chebyshev–Lobatto points on [lo, hi], both ends included."""
    x = np.cos(np.pi * np.arange(n) / (n - 1))[::-1]
    return lo + (hi - lo) * (x + 1.0) / 2.0


def circle_grid(n: int = 64) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def default_z_grid(dist: DiscreteStableDist) -> tuple[np.ndarray, str]:
    if dist.support_kind in ("nonnegative", "progression"):
        return one_sided_grid().astype(complex), "64 Chebyshev points on [0.01, 1]"
    return circle_grid(), "64 uniform points on |z| = 1"


def default_t_grid(n: int = 201, t_max: float = 5.0) -> np.ndarray:
    return np.linspace(-t_max, t_max, n)


def _grid(z_grid, dist) -> tuple[np.ndarray, str]:
    if z_grid is None:
        return default_z_grid(dist)
    z = np.asarray(z_grid, dtype=complex)
    return z, f"{z.size} user points"


def _params(dist: DiscreteStableDist) -> dict[str, Any]:
    return dist.to_dict()


# --- stability identities -----------------------------------------------------


def _first_sense_op(dist: DiscreteStableDist, op: type[ThinningOp] | None):
    if isinstance(dist, PDS):
        expected = ModGeometric
    elif isinstance(dist, TPDS):
        expected = ChebyshevThin
    else:
        raise FamilyMismatchError(f"first-sense check needs PDS or TPDS, got {dist.family}")
    if op is not None and op is not expected:
        raise FamilyMismatchError(f"{dist.family} pairs with {expected.family}, not {op.family}")
    return dist.thinning_op


def verify_first_sense(
    dist: DiscreteStableDist,
    op: type[ThinningOp] | None = None,
    n_set: Sequence[int] = range(2, 11),
    z_grid=None,
    tolerance: float = 1e-12,
) -> VerificationReport:
    """max |P(z) - P(Q_{n^{-1/γ}}(z))^n| over n and z."""
    make = _first_sense_op(dist, op)
    z, desc = _grid(z_grid, dist)
    dist.pgf(z)  # domain check
    # Work with c = 1 - z so that points near z = 1 keep their precision.
    c = 1.0 - z
    base = dist.pgf_shifted(c)
    per_n = {}
    for n in n_set:
        if n == 1:
            per_n[1] = 0.0
            continue
        q = make(n ** (-1.0 / dist.gamma))
        per_n[int(n)] = float(np.max(np.abs(base - dist.pgf_shifted(q.shifted(c)) ** n)))
    worst = max(per_n.values()) if per_n else 0.0
    return VerificationReport(
        "first_sense", _params(dist), desc, worst, tolerance, {"residual_by_n": per_n}
    )


def _second_sense_op(dist: DiscreteStableDist, n: int, op: type[ThinningOp] | None) -> ThinningOp:
    if isinstance(dist, FirstPassage):
        made = ChebyshevPortly(n, dist.m)
    elif isinstance(dist, GeomPortlyStable):
        made = GeometricPortly(n ** (-1.0 / dist.gamma))
    elif isinstance(dist, Degenerate):
        made = DegeneratePortly(n)
    else:
        raise FamilyMismatchError(f"no second-sense pairing for {dist.family}")
    if op is not None and not isinstance(made, op):
        raise FamilyMismatchError(f"{dist.family} pairs with {made.family}, not {op.family}")
    return made


def verify_second_sense(
    dist: DiscreteStableDist,
    op: type[ThinningOp] | None = None,
    n_set: Sequence[int] = (2, 3, 4),
    z_grid=None,
    tolerance: float = 1e-12,
) -> VerificationReport:
    """max |P(Q_n(z)) - P(z)^n| over n and z."""
    z, desc = _grid(z_grid, dist)
    dist.pgf(z)  # domain check
    c = 1.0 - z
    base = dist.pgf_shifted(c)
    per_n = {}
    for n in n_set:
        q = _second_sense_op(dist, int(n), op)
        per_n[int(n)] = float(np.max(np.abs(dist.pgf_shifted(q.shifted(c)) - base**n)))
    worst = max(per_n.values()) if per_n else 0.0
    return VerificationReport(
        "second_sense", _params(dist), desc, worst, tolerance, {"residual_by_n": per_n}
    )


def verify_third_sense(
    dist: DiscreteStableDist,
    op: type[ThinningOp] | None = None,
    p1: float = 0.5,
    p2: float = 0.5,
    z_grid=None,
    tolerance: float = 1e-12,
) -> VerificationReport:
    """|P(Q_p(z)) - P(Q_{p1}(z)) P(Q_{p2}(z))| with p^γ = p1^γ + p2^γ (or n = n1 + n2)."""
    z, desc = _grid(z_grid, dist)
    params = {**_params(dist), "p1": p1, "p2": p2}
    if isinstance(dist, FirstPassage):
        n1, n2 = int(p1), int(p2)
        if n1 != p1 or n2 != p2 or n1 < 1 or n2 < 1:
            raise DomainError("ChebyshevPortly indices must be positive integers")
        ops = [ChebyshevPortly(n, dist.m) for n in (n1 + n2, n1, n2)]
        if op is not None and op is not ChebyshevPortly:
            raise FamilyMismatchError("FirstPassage pairs with ChebyshevPortly")
        params["n"] = n1 + n2
    else:
        make = _first_sense_op(dist, op)
        g = dist.gamma
        p = (p1**g + p2**g) ** (1.0 / g)
        params["p"] = p
        if p > 1.0 + 1e-12:
            return VerificationReport(
                "third_sense", params, desc, math.inf, tolerance,
                {"feasible": False, "reason": f"p = {p!r} exceeds 1"},
            )
        p = min(p, 1.0)
        ops = [None if v >= 1.0 else make(v) for v in (p, p1, p2)]

    dist.pgf(z)  # domain check
    c = 1.0 - z

    def at(q):
        return dist.pgf_shifted(c if q is None else q.shifted(c))

    resid = float(np.max(np.abs(at(ops[0]) - at(ops[1]) * at(ops[2]))))
    return VerificationReport("third_sense", params, desc, resid, tolerance, {"feasible": True})


def verify_commutativity(
    op: type[ThinningOp],
    pairs: Sequence[tuple[float, float]],
    z_grid=None,
    tolerance: float = 1e-12,
    **shared,
) -> VerificationReport:
    """max |Q_{p1}(Q_{p2}(z)) - Q_{p2}(Q_{p1}(z))| over the pairs and grid."""
    if z_grid is None:
        z, desc = one_sided_grid().astype(complex), "64 Chebyshev points on [0.01, 1]"
    else:
        z = np.asarray(z_grid, dtype=complex)
        desc = f"{z.size} user points"
    per_pair = []
    for a, b in pairs:
        qa, qb = op(a, **shared), op(b, **shared)
        per_pair.append(float(np.max(np.abs(qa(qb(z)) - qb(qa(z))))))
    worst = max(per_pair) if per_pair else 0.0
    params = {"op": op.family, "pairs": [list(p) for p in pairs], **shared}
    return VerificationReport(
        "commutativity", params, desc, worst, tolerance, {"residual_by_pair": per_pair}
    )


def verify_infinite_divisibility(
    dist: DiscreteStableDist,
    n_set: Sequence[int] = (2, 3, 5, 10),
    z_grid=None,
    tolerance: float = 1e-13,
) -> VerificationReport:
    """max |P_λ(z) - P_{λ/n}(z)^n|."""
    z, desc = _grid(z_grid, dist)
    base = dist.pgf(z)
    per_n = {
        int(n): float(np.max(np.abs(base - dist.with_params(lam=dist.lam / n).pgf(z) ** n)))
        for n in n_set
    }
    return VerificationReport(
        "infinite_divisibility", _params(dist), desc, max(per_n.values()), tolerance,
        {"residual_by_n": per_n},
    )


# --- continuous limits --------------------------------------------------------


def _skew_power(t: np.ndarray, alpha: float, beta: float = 1.0) -> np.ndarray:
    """|t|^α (1 - iβ sign(t) tan(πα/2)) cos(πα/2), i.e. β-weighted (∓it)^α."""
    c = math.cos(math.pi * alpha / 2)
    s = math.sin(math.pi * alpha / 2)
    return np.abs(t) ** alpha * (c - 1j * beta * np.sign(t) * s)


def _pds_kappa_rule(p, a):
    return PDS(p["gamma"], p["lam"], 1.0 - a * p["c"])


def _pds_kappa_target(p, t):
    w = -1j * t / (p["c"] - 1j * t)
    return np.exp(-p["lam"] * w ** p["gamma"])


def _pds_lambda_rule(p, a):
    return PDS(p["gamma"], p["b"] / a ** p["gamma"], p["kappa"])


def _pds_lambda_target(p, t):
    g = p["gamma"]
    scale = p["b"] / (1.0 - p["kappa"]) ** g
    return np.exp(-scale * _skew_power(t, g))


def _ds_rule(p, a):
    return DS(p["gamma"], p["beta"], p["lam"], (1.0 + a) / 2.0, 0.0)


def _ds_target(p, t):
    return np.exp(-p["lam"] * _skew_power(t, p["gamma"], p["beta"]))


def _ds_drift_rule(p, a):
    return DS(p["gamma"], p["beta"], p["b"] / a ** p["gamma"], p["q"], p["kappa"])


def _ds_drift_target(p, t):
    g = p["gamma"]
    scale = p["b"] * ((2 * p["q"] - 1) / (1 - p["kappa"])) ** g
    return np.exp(-scale * _skew_power(t, g, p["beta"]))


def _sds_kappa_rule(p, a):
    return SDS(p["gamma"], p["lam"], 1.0 - a * p["c"])


def _sds_kappa_target(p, t):
    return np.exp(-p["lam"] * (t * t / (t * t + p["c"] ** 2)) ** p["gamma"])


def _sds_lambda_rule(p, a):
    return SDS(p["gamma"], p["b"] / a ** (2 * p["gamma"]), p["kappa"])


def _sds_lambda_target(p, t):
    g, k = p["gamma"], p["kappa"]
    sigma = p["b"] / 2**g * (1 + k) ** g / (1 - k) ** (2 * g)
    return np.exp(-sigma * np.abs(t) ** (2 * g))


def _tpds_rule(p, a):
    return TPDS(p["gamma"], p["sigma"] / a ** (p["gamma"] / 2), p["b"])


def _tpds_target(p, t):
    g, b = p["gamma"], p["b"]
    scale = p["sigma"] * 2**g * ((1 + b) / (1 - b)) ** (g / 2)
    return np.exp(-scale * _skew_power(t, g / 2))


@dataclass(frozen=True)
class _Rule:
    family: str
    coupling: str
    make: Callable[[dict, float], DiscreteStableDist]
    target: Callable[[dict, np.ndarray], np.ndarray]
    required: tuple[str, ...]
    level: str = "theorem"


LIMIT_RULES: dict[str, _Rule] = {
    "pds_kappa": _Rule("PDS", "kappa = 1 - a c", _pds_kappa_rule, _pds_kappa_target, ("gamma", "lam", "c")),
    "pds_lambda": _Rule(
        "PDS", "lambda = b / a^gamma", _pds_lambda_rule, _pds_lambda_target, ("gamma", "b", "kappa")
    ),
    "ds_q": _Rule("DS", "2q - 1 = a", _ds_rule, _ds_target, ("gamma", "beta", "lam")),
    "ds_drift": _Rule(
        "DS", "lambda = b / a^gamma, q fixed", _ds_drift_rule, _ds_drift_target,
        ("gamma", "beta", "b", "q", "kappa"), "remark-level",
    ),
    "sds_kappa": _Rule("SDS", "kappa = 1 - a c", _sds_kappa_rule, _sds_kappa_target, ("gamma", "lam", "c")),
    "sds_lambda": _Rule(
        "SDS", "lambda = b / a^(2 gamma)", _sds_lambda_rule, _sds_lambda_target, ("gamma", "b", "kappa")
    ),
    "tpds_sigma": _Rule(
        "TPDS", "lambda = sigma / a^(gamma/2)", _tpds_rule, _tpds_target, ("gamma", "sigma", "b")
    ),
}


@dataclass(frozen=True)
class LimitSpec:
    """A scale sequence, a coupling rule and the parameters it needs."""

    rule: str
    params: dict[str, float]
    a: tuple[float, ...] = DEFAULT_A

    def __post_init__(self) -> None:
        if self.rule not in LIMIT_RULES:
            raise DomainError(f"unknown coupling rule {self.rule!r}; choose from {sorted(LIMIT_RULES)}")
        missing = [k for k in LIMIT_RULES[self.rule].required if k not in self.params]
        if missing:
            raise DomainError(f"rule {self.rule} needs parameters {missing}")
        a = np.asarray(self.a, dtype=float)
        if a.size == 0 or np.any(a <= 0) or np.any(np.diff(a) >= 0):
            raise DomainError("scale sequence a must be positive and strictly decreasing")


def standard_limit_spec(rule: str) -> LimitSpec:
    """The parameter choice exercised by the acceptance suite for each rule."""
    defaults = {
        "pds_kappa": {"gamma": 0.5, "lam": 1.0, "c": 1.0},
        "pds_lambda": {"gamma": 0.5, "b": 1.0, "kappa": 0.3},
        "ds_q": {"gamma": 0.7, "beta": 0.5, "lam": 1.0},
        "ds_drift": {"gamma": 0.7, "beta": 0.5, "b": 1.0, "q": 0.8, "kappa": 0.3},
        "sds_kappa": {"gamma": 0.5, "lam": 1.0, "c": 1.0},
        "sds_lambda": {"gamma": 0.5, "b": 1.0, "kappa": 0.3},
        "tpds_sigma": {"gamma": 1.0, "sigma": 1.0, "b": 0.3},
    }
    return LimitSpec(rule, defaults[rule])


def limit_table(spec: LimitSpec, t_grid=None) -> list[tuple[float, float]]:
    """(a, sup_t |f^a(t) - φ(t)|) for each scale in the spec."""
    rule = LIMIT_RULES[spec.rule]
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    phi = rule.target(spec.params, t)
    rows = []
    for a in spec.a:
        dist = rule.make(spec.params, a)
        f = np.exp(dist.log_char_fn(a * t))
        rows.append((float(a), float(np.max(np.abs(f - phi)))))
    return rows


def _monotone_report(identity, params, desc, rows, tolerance, extra) -> VerificationReport:
    res = [r for _, r in rows]
    # Once both residuals sit at rounding level the order between them is noise.
    decreasing = all(b < a or max(a, b) < ROUNDING_FLOOR for a, b in zip(res, res[1:]))
    final = res[-1]
    # A non-monotone schedule fails regardless of the final value.
    worst = final if decreasing else math.inf
    details = {"schedule": [list(r) for r in rows], "monotone": decreasing, "final": final, **extra}
    return VerificationReport(identity, params, desc, worst, tolerance, details)


def verify_limit(spec: LimitSpec, t_grid=None, tolerance: float = 0.02) -> VerificationReport:
    """Residuals must decrease along the a-schedule and end below ``tolerance``."""
    rule = LIMIT_RULES[spec.rule]
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    rows = limit_table(spec, t)
    desc = f"{t.size} points on [{t.min():g}, {t.max():g}]"
    params = {"rule": spec.rule, "family": rule.family, "coupling": rule.coupling, **spec.params}
    return _monotone_report("limit", params, desc, rows, tolerance, {"level": rule.level})


def _attraction_setup(dist: DiscreteStableDist):
    if isinstance(dist, PDS) and dist.gamma < 1.0:
        g = dist.gamma
        scale = dist.lam / (1.0 - dist.kappa) ** g

        def target(t):
            return np.exp(-scale * _skew_power(t, g))

        return g, lambda n: n ** (1.0 / g), target
    if isinstance(dist, SDS) and dist.gamma < 1.0:
        g, k = dist.gamma, dist.kappa
        sigma = dist.lam / 2**g * (1 + k) ** g / (1 - k) ** (2 * g)

        def target(t):
            return np.exp(-sigma * np.abs(t) ** (2 * g))

        return 2 * g, lambda n: n ** (1.0 / (2 * g)), target
    if isinstance(dist, FirstPassage) and dist.M == 1 and dist.m == 1:

        def target(t):
            return np.exp(-math.sqrt(2.0) * np.sqrt(-1j * t))

        return 0.5, lambda n: float(n) ** 2, target
    raise DomainError("attraction is checked for PDS or SDS with gamma < 1 and FirstPassage(1, 1)")


def attraction_table(dist: DiscreteStableDist, n_set=DEFAULT_N, t_grid=None) -> list[tuple[float, float]]:
    _, norm, target = _attraction_setup(dist)
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    g = target(t)
    rows = []
    for n in n_set:
        f = np.exp(n * dist.log_char_fn(t / norm(n)))
        rows.append((float(n), float(np.max(np.abs(f - g)))))
    return rows


def verify_attraction(
    dist: DiscreteStableDist, n_set=DEFAULT_N, t_grid=None, tolerance: float = 0.02
) -> VerificationReport:
    """sup_t |f^n(t / n^{1/α}) - g(t)| must decrease in n and end below ``tolerance``."""
    alpha, _, _ = _attraction_setup(dist)
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    rows = attraction_table(dist, n_set, t)
    desc = f"{t.size} points on [{t.min():g}, {t.max():g}]"
    return _monotone_report("attraction", _params(dist), desc, rows, tolerance, {"alpha": alpha})


# --- tails ----------------------------------------------------------------------


def tail_constant(gamma: float, lam: float, kappa: float = 0.0) -> float:
    """C with x^{2γ} P(|X| > x) -> C for SDS(γ, λ, κ), 0 < γ < 1."""
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0,1) for a tail constant, got {gamma}")
    sigma = lam / 2**gamma * (1 + kappa) ** gamma / (1 - kappa) ** (2 * gamma)
    if gamma == 0.5:
        return sigma * 2.0 / math.pi
    return float(sigma / (special.gamma(1.0 - 2.0 * gamma) * math.cos(math.pi * gamma)))


def _tail_mass(dist: SDS, x: int, tol: float) -> float:
    """P(|X| > x) = 1 - sum_{|k| <= x} p_k."""
    window = pmf_cf(dist, -x, x, tol=tol).probs
    return float(1.0 - math.fsum(window))


def verify_tail_constant(
    gamma: float,
    lam: float,
    kappa: float = 0.0,
    x_set: Sequence[int] = (50, 100, 200),
    tolerance: float = 0.1,
    tol: float = 1e-11,
) -> VerificationReport:
    """Relative error of x^{2γ} P(|X| > x) against the limiting constant."""
    dist = SDS(gamma, lam, kappa)
    c = tail_constant(gamma, lam, kappa)
    rows = []
    for x in x_set:
        fitted = x ** (2 * gamma) * _tail_mass(dist, int(x), tol)
        rows.append((float(x), abs(fitted / c - 1.0), fitted))
    sched = [(x, e) for x, e, _ in rows]
    rep = _monotone_report(
        "tail_constant", _params(dist), f"x in {list(x_set)}", sched, tolerance,
        {"constant": c, "fitted": [f for _, _, f in rows]},
    )
    return rep


# --- mixture characterization -----------------------------------------------------


def verify_mixture_characterization(
    gamma_prime: float,
    gamma: float,
    lam: float,
    kappa: float = 0.0,
    z_grid=None,
    *,
    method: str = "analytic",
    n_draws: int = 10**5,
    seed: int = 0,
) -> VerificationReport:
    """E_S[P_{γ'/γ, λ^{1/γ} S}(z)] against P_{γ', λ}(z), S positive γ-stable.

    ``analytic`` integrates S through its Laplace transform; ``monte_carlo``
    averages over draws of S and reports the largest standardized deviation,
    with a Bonferroni p-value against the fixed threshold 0.001.
    """
    if not 0.0 < gamma_prime <= gamma <= 1.0:
        raise DomainError("need 0 < gamma' <= gamma <= 1")
    target = PDS(gamma_prime, lam, kappa)
    z, desc = _grid(z_grid, target)
    exact = target.pgf(z)
    inner = PDS(gamma_prime / gamma, 1.0, kappa)
    # h^{γ'/γ}: the exponent of the inner law at unit intensity.
    h = -inner.log_pgf(z)
    params = {"gamma_prime": gamma_prime, "gamma": gamma, "lambda": lam, "kappa": kappa}
    if method == "analytic":
        u = lam ** (1.0 / gamma) * h
        mixed = np.exp(-(u**gamma))
        resid = float(np.max(np.abs(mixed - exact)))
        return VerificationReport("mixture_characterization", params, desc, resid, 1e-13, {"method": method})
    if method != "monte_carlo":
        raise DomainError("method must be 'analytic' or 'monte_carlo'")
    stream = RandomStream(seed)
    s = np.ones(n_draws) if gamma == 1.0 else sample_positive_stable(gamma, stream, size=n_draws)
    vals = np.exp(-np.outer(lam ** (1.0 / gamma) * s, h))
    mean = vals.mean(axis=0)
    se = np.sqrt(vals.real.var(axis=0) + vals.imag.var(axis=0)) / math.sqrt(n_draws)
    diff = np.abs(mean - exact)
    zscore = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff > 1e-12, np.inf, 0.0))
    k = z.size
    p_value = float(min(1.0, k * 2.0 * stats.norm.sf(np.max(zscore))))
    critical = float(stats.norm.isf(P_THRESHOLD / (2.0 * k)))
    details = {
        "method": method,
        "n_draws": n_draws,
        "seed": seed,
        "p_value": p_value,
        "threshold": P_THRESHOLD,
        "max_abs_difference": float(np.max(diff)),
    }
    return VerificationReport(
        "mixture_characterization", params, desc, float(np.max(zscore)), critical, details
    )


# --- sampler oracles --------------------------------------------------------------


def oracle_pmf(dist: DiscreteStableDist, mass: float = 0.999, tol: float = 1e-9) -> LaurentSeries:
    """PMF window holding at least ``mass`` of the law, widened by doubling."""
    one_sided = dist.support_kind in ("nonnegative", "progression")
    # hi + 1 a power of two keeps the FFT grid at exactly 4 (hi + 1).
    hi = 63
    while True:
        if one_sided:
            # A circle of radius 1 - c/hi damps aliased tail mass geometrically.
            res = extract_pmf(
                dist.as_pgf(), 0, hi, radius=1.0 - 4.0 / hi, tol=tol, max_grid=2**25
            )
        elif dist.support_kind == "nonpositive":
            res = pmf(dist, -hi, 0).values
        else:
            res = pmf(dist, -hi, hi).values
        if res.total() >= mass:
            return res
        if hi >= 2**22:
            raise DomainError(f"no window up to {hi} holds mass {mass}")
        hi = 2 * hi + 1


def tv_distance(values, oracle: LaurentSeries) -> float:
    """Total variation between an empirical sample and an oracle window.

    Mass outside the window is lumped into one extra cell on both sides.
    """
    x = np.asarray(values, dtype=np.int64)
    probs = np.asarray(oracle.coeffs, dtype=float)
    lo = oracle.k_min
    idx = x - lo
    inside = (idx >= 0) & (idx < probs.size)
    emp = np.bincount(idx[inside], minlength=probs.size)[: probs.size] / x.size
    outside_emp = 1.0 - emp.sum()
    outside_oracle = max(0.0, 1.0 - probs.sum())
    return 0.5 * (float(np.abs(emp - probs).sum()) + abs(outside_emp - outside_oracle))
