"""Factorial moments, fractional absolute moments and moment existence."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .distributions import DS, PDS, SDS, TPDS, DiscreteStableDist, FirstPassage, GeomPortlyStable
from .errors import DomainError
from .series import numeric_factorial_moment
from .special_fn import bell_partial, binom_real

__all__ = [
    "MomentValue",
    "Existence",
    "factorial_moment_pds",
    "factorial_moment_sds",
    "sds_bell_arguments",
    "factorial_moment",
    "fractional_moment_constant",
    "fractional_moment_sds",
    "moment_existence",
    "moment_exists",
]


@dataclass(frozen=True)
class MomentValue:
    value: float
    infinite: bool = False
    abs_error: float = 0.0


@dataclass(frozen=True)
class Existence:
    exists: bool
    threshold: float  # moments of order r exist for r < threshold (inf: all)
    basis: str  # "proven" or "inferred"


def _check_common(lam: float, kappa: float, n: int) -> None:
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be positive, got {lam}")
    if not 0.0 <= kappa < 1.0:
        raise DomainError(f"kappa must lie in [0,1), got {kappa}")
    if n < 1 or int(n) != n:
        raise DomainError(f"moment order must be a positive integer, got {n}")


def factorial_moment_pds(lam: float, kappa: float, n: int) -> float:
    """E[(X)_n] for PDS(1, λ, κ)."""
    _check_common(lam, kappa, n)
    if kappa == 0.0:
        return lam**n
    # κ^n (λ/κ)^{s+1} expanded as λ^{s+1} κ^{n-s-1}, finite for any κ > 0
    total = 0.0
    for s in range(n):
        total += binom_real(n - 1, s) * lam ** (s + 1) * kappa ** (n - s - 1) / math.factorial(s + 1)
    return math.factorial(n) * total / (1.0 - kappa) ** n


def sds_bell_arguments(kappa: float, n: int) -> list[float]:
    """x_j = j!(κ^{j-1} + (-1)^j), j = 1..n: derivatives at 1 of S(z) + S(1/z), rescaled."""
    return [math.factorial(j) * (kappa ** (j - 1) + (-1) ** j) for j in range(1, n + 1)]


def factorial_moment_sds(lam: float, kappa: float, n: int) -> float:
    """E[(X)_n] for SDS(1, λ, κ) via partial Bell polynomials."""
    _check_common(lam, kappa, n)
    x = sds_bell_arguments(kappa, n)
    total = sum((lam / 2.0) ** k * bell_partial(n, k, x[: n - k + 1]) for k in range(1, n + 1))
    return total / (1.0 - kappa) ** n


def factorial_moment(dist: DiscreteStableDist, n: int) -> float:
    """E[(X)_n]: closed form for γ = 1 PDS/SDS, Cauchy integral otherwise."""
    if isinstance(dist, PDS) and dist.gamma == 1.0 and dist.m == 1:
        return factorial_moment_pds(dist.lam, dist.kappa, n)
    if isinstance(dist, SDS) and dist.gamma == 1.0 and dist.m == 1:
        return factorial_moment_sds(dist.lam, dist.kappa, n)
    if dist.radius_at_one is None:
        raise DomainError(
            f"{dist.family} with these parameters is not analytic at z=1; "
            "integer moments of order >= the tail index are infinite"
        )
    return numeric_factorial_moment(dist.as_pgf(), n)


def fractional_moment_constant(r: float) -> float:
    """c_r with E|X|^r = c_r ∫_0^∞ (1 - Re f(t)) t^{-r-1} dt, 0 < r < 2."""
    return 2.0 / math.pi * math.gamma(1.0 + r) * math.sin(math.pi * r / 2.0)


def _sds_base_over_t2(dist: SDS, t: np.ndarray) -> np.ndarray:
    """(1 - Re-part of the geometric mixture)/t², free of cancellation near t = 0."""
    k, m = dist.kappa, dist.m
    c = np.cos(m * t)
    # 1 - cos(mt) = 2 sin²(mt/2) = (m²t²/2) sinc²(mt/2π)
    one_minus_c_over_t2 = 0.5 * m * m * np.sinc(m * t / (2.0 * np.pi)) ** 2
    return (1.0 + k) * one_minus_c_over_t2 / (1.0 - 2.0 * k * c + k * k)


def _scaled_one_minus_cf(dist: SDS, t):
    """(1 - f(t)) / t^{2γ} for the real CF f of SDS."""
    t = np.asarray(t, dtype=float)
    ratio = dist.lam * _sds_base_over_t2(dist, t) ** dist.gamma
    x = ratio * np.abs(t) ** (2.0 * dist.gamma)
    # -expm1(-x)/x, equal to 1 at x = 0
    phi = np.where(x > 1e-300, -np.expm1(-x) / np.where(x > 1e-300, x, 1.0), 1.0)
    return ratio * phi


def fractional_moment_sds(
    gamma: float, lam: float, kappa: float, r: float, *, m: int = 1, at_one: str = "reject"
) -> MomentValue:
    """E|X|^r for SDS(γ, λ, κ, m), 0 < r < 2.

    The integral over (0, ∞) is folded onto one period of the CF with the
    Hurwitz zeta function, leaving two integrals over [0, 2π/m]: one with
    the algebraic endpoint behaviour t^{2γ-r-1}, one smooth.
    """
    dist = SDS(gamma, lam, kappa, m)
    if not 0.0 < r < 2.0:
        raise DomainError(f"r must lie in (0,2), got {r}")
    if r == 1.0 and at_one != "limit":
        raise DomainError("r = 1 is rejected by default; pass at_one='limit' to evaluate it")
    if at_one not in ("reject", "limit"):
        raise DomainError("at_one must be 'reject' or 'limit'")
    if r >= 2.0 * gamma:
        return MomentValue(math.inf, True)
    period = 2.0 * math.pi / m
    alpha = 2.0 * gamma - r - 1.0

    def near(u):
        # Integrand divided by the weight u^{2γ-r-1}.
        return _scaled_one_minus_cf(dist, u)

    head, err1 = integrate.quad(
        near, 0.0, period, weight="alg", wvar=(alpha, 0.0), epsabs=1e-13, epsrel=1e-12, limit=200
    )

    def folded(u):
        g = _scaled_one_minus_cf(dist, u) * u ** (2.0 * gamma)
        return g * special.zeta(r + 1.0, 1.0 + u / period)

    rest, err2 = integrate.quad(folded, 0.0, period, epsabs=1e-13, epsrel=1e-12, limit=200)
    rest *= period ** (-r - 1.0)
    c = fractional_moment_constant(r)
    return MomentValue(c * (head + rest), False, c * (err1 + err2 * period ** (-r - 1.0)))


def moment_existence(dist: DiscreteStableDist, r: float) -> Existence:
    """Whether E|X|^r < ∞, with the threshold and how it is justified."""
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")
    if isinstance(dist, SDS):
        thr, basis = (math.inf, "proven") if dist.gamma == 1.0 else (2.0 * dist.gamma, "proven")
    elif isinstance(dist, DS):
        if dist.gamma == 1.0:
            thr, basis = math.inf, "proven"
        elif dist.q == 0.5:
            thr, basis = 2.0 * dist.gamma, "proven"
        else:
            # A nonzero drift term makes the exponent behave like |t|^γ.
            thr, basis = dist.gamma, "inferred"
    elif isinstance(dist, PDS):
        thr, basis = (math.inf, "proven") if dist.gamma == 1.0 else (dist.gamma, "inferred")
    elif isinstance(dist, TPDS):
        thr, basis = (math.inf, "inferred") if dist.gamma == 2.0 else (dist.gamma / 2.0, "inferred")
    elif isinstance(dist, GeomPortlyStable):
        thr, basis = (math.inf, "proven") if dist.gamma == 1.0 else (dist.gamma, "inferred")
    elif isinstance(dist, FirstPassage):
        thr, basis = 0.5, "proven"
    else:
        thr, basis = math.inf, "proven"
    return Existence(r < thr, thr, basis)


def moment_exists(dist: DiscreteStableDist, r: float) -> bool:
    return moment_existence(dist, r).exists
