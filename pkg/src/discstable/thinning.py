"""Thinning and portlying operators.

Each operator is an immutable value object that evaluates as a PGF, exposes
its PMF and mean, and can draw sums of i.i.d. copies (p ⊙ x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import ClassVar

import numpy as np

from . import special_fn as sf
from .errors import DomainError, FamilyMismatchError
from .series import AnalyticPgf, LaurentSeries, extract_pmf, identity_pgf

__all__ = [
    "ThinningOp",
    "Bernoulli",
    "ModGeometric",
    "TwoSidedModGeometric",
    "ChebyshevThin",
    "DegeneratePortly",
    "GeometricPortly",
    "ChebyshevPortly",
    "pgf_eval",
    "pmf",
    "mean",
    "compose_ops",
    "apply_thinning",
    "apply_two_sided",
    "TableSampler",
]

TAIL_CUTOFF = 1e-12


def _open_unit(name: str, v: float, family: str) -> None:
    if not (0.0 < v < 1.0):
        raise DomainError(f"{name} must lie in (0,1) for {family}, got {v}")


def _positive_int(name: str, v, family: str) -> None:
    if int(v) != v or v < 1:
        raise DomainError(f"{name} must be a positive integer for {family}, got {v}")


class TableSampler:
    """Inverse-CDF sampling from a tabulated PMF on {k_min, ..., k_max}."""

    def __init__(self, probs: np.ndarray, k_min: int = 0) -> None:
        probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
        self.k_min = int(k_min)
        self.cdf = np.cumsum(probs)
        self.cdf /= self.cdf[-1]

    def draw(self, size, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(size)
        idx = np.searchsorted(self.cdf, u, side="right")
        return np.minimum(idx, len(self.cdf) - 1).astype(np.int64) + self.k_min


def _sum_groups(draws: np.ndarray, counts: np.ndarray) -> np.ndarray:
    out = np.zeros(len(counts), dtype=np.int64)
    nz = counts > 0
    if np.any(nz):
        starts = np.concatenate([[0], np.cumsum(counts[nz])[:-1]])
        out[nz] = np.add.reduceat(draws, starts)
    return out


@dataclass(frozen=True)
class ThinningOp:
    """Common behaviour of the operator families."""

    family: ClassVar[str] = "abstract"
    index_name: ClassVar[str] = "p"
    support_kind: ClassVar[str] = "nonnegative"

    # -- evaluation -----------------------------------------------------
    def _eval(self, z: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def pgf(self, z):
        z = np.asarray(z, dtype=complex)
        out = self._eval(np.atleast_1d(z))
        return out.reshape(z.shape) if z.ndim else complex(out[0])

    __call__ = pgf

    @property
    def lattice(self) -> int:
        return getattr(self, "m", 1)

    @property
    def radius_at_one(self) -> float | None:
        return None

    def as_pgf(self) -> AnalyticPgf:
        return AnalyticPgf(self._eval, self.support_kind, self.lattice, self.radius_at_one, repr(self))

    def shifted(self, c):
        """1 - Q(1 - c); overridden where the complement can be kept exact near z = 1."""
        c = np.asarray(c, dtype=complex)
        return 1.0 - self._eval(1.0 - c)

    # -- structure ------------------------------------------------------
    @property
    def index(self):
        return getattr(self, self.index_name)

    def with_index(self, value) -> "ThinningOp":
        return replace(self, **{self.index_name: value})

    def shared_params(self) -> dict:
        d = {f: getattr(self, f) for f in self.__dataclass_fields__ if f != self.index_name}
        return d

    # -- moments and mass -------------------------------------------------
    def mean(self) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def pmf(self, k_hi: int) -> LaurentSeries:
        return extract_pmf(self.as_pgf(), 0, k_hi)

    @cached_property
    def _table(self) -> TableSampler:
        k_hi = 64
        while True:
            series = self.pmf(k_hi)
            mass = series.total()
            if mass >= 1.0 - TAIL_CUTOFF or k_hi >= 2**20:
                break
            k_hi *= 4
        if np.min(series.coeffs) < -1e-12:
            raise DomainError(f"{self!r} has negative extracted probabilities; not a PGF")
        return TableSampler(series.coeffs, series.k_min)

    def draw_sum(self, counts, rng: np.random.Generator) -> np.ndarray:
        """Sum of ``counts[i]`` independent draws, vectorised over ``counts``."""
        counts = np.asarray(counts, dtype=np.int64)
        draws = self._table.draw(int(counts.sum()), rng)
        return _sum_groups(draws, counts)


# ---------------------------------------------------------------------------
# Thinning families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bernoulli(ThinningOp):
    p: float
    family: ClassVar[str] = "Bernoulli"

    def __post_init__(self) -> None:
        _open_unit("p", self.p, self.family)

    def _eval(self, z):
        return self.p * z + (1.0 - self.p)

    @property
    def radius_at_one(self):
        return math.inf

    def mean(self) -> float:
        return self.p

    def pmf(self, k_hi: int) -> LaurentSeries:
        c = np.zeros(k_hi + 1)
        c[0] = 1.0 - self.p
        if k_hi >= 1:
            c[1] = self.p
        return LaurentSeries(0, c)

    def draw_sum(self, counts, rng):
        return rng.binomial(np.asarray(counts, dtype=np.int64), self.p).astype(np.int64)


def one_minus_pow(c, m: int):
    """1 - (1 - c)^m without cancellation for small c."""
    c = np.asarray(c, dtype=complex)
    return c if m == 1 else -np.expm1(m * np.log1p(-c))


def one_minus_root(d, m: int):
    """1 - (1 - d)^{1/m} without cancellation for small d."""
    d = np.asarray(d, dtype=complex)
    return d if m == 1 else -np.expm1(np.log1p(-d) / m)


def _geo_S(z, kappa, m):
    zm = z**m
    return (1.0 - kappa) * zm / (1.0 - kappa * zm)


def _geo_S_inv(y, kappa, m):
    base = y / ((1.0 - kappa) + kappa * y)
    return base if m == 1 else base ** (1.0 / m)


@dataclass(frozen=True)
class ModGeometric(ThinningOp):
    """Zero-modified geometric thinning, evaluated as S^{-1} ∘ B_p ∘ S."""

    p: float
    kappa: float = 0.0
    m: int = 1
    family: ClassVar[str] = "ModGeometric"

    def __post_init__(self) -> None:
        _positive_int("m", self.m, self.family)
        if self.m == 1:
            _open_unit("p", self.p, self.family)
            if not (0.0 <= self.kappa < 1.0):
                raise DomainError(f"kappa must lie in [0,1) for {self.family}, got {self.kappa}")
        elif not (0.0 < self.p < self.kappa < 1.0):
            raise DomainError(
                f"{self.family} with m>1 requires 0 < p < kappa < 1, got p={self.p}, kappa={self.kappa}"
            )

    def _eval(self, z):
        y = self.p * _geo_S(z, self.kappa, self.m) + (1.0 - self.p)
        return _geo_S_inv(y, self.kappa, self.m)

    def shifted(self, c):
        k = self.kappa
        d = one_minus_pow(c, self.m)
        one_minus_y = self.p * d / (1.0 - k + k * d)
        y = 1.0 - one_minus_y
        return one_minus_root((1.0 - k) * one_minus_y / ((1.0 - k) + k * y), self.m)

    @property
    def radius_at_one(self):
        p, k, m = self.p, self.kappa, self.m
        if k == 0.0:
            return math.inf
        w_star = (1.0 - p * k) / (k * (1.0 - p))
        if m > 1:
            w_star = min(w_star, (1.0 - p) / (k - p))
        return w_star ** (1.0 / m) - 1.0

    def mean(self) -> float:
        return self.p

    def pmf(self, k_hi: int) -> LaurentSeries:
        p, k, m = self.p, self.kappa, self.m
        c = np.zeros(k_hi + 1)
        if m == 1:
            c[0] = (1 - p) / (1 - p * k)
            n = np.arange(1, k_hi + 1)
            c[1:] = p * k ** (n - 1) * (1 - p) ** (n - 1) * (1 - k) ** 2 / (1 - p * k) ** (n + 1)
            return LaurentSeries(0, c, 1)
        x = (k - p) * (1 - p * k) / ((1 - p) ** 2 * k)
        ratio = (1 - p) / (1 - p * k)
        for n in range(k_hi // m + 1):
            c[m * n] = (
                k**n
                * ratio ** (1 / m + n)
                * sf.binom_real(1 / m + n - 1, n)
                * sf.gauss_2f1(-n, -1 / m, 1 - 1 / m - n, x)
            )
        return LaurentSeries(0, c, m)

    def draw_sum(self, counts, rng):
        if self.m > 1:
            return super().draw_sum(counts, rng)
        counts = np.asarray(counts, dtype=np.int64)
        p, k = self.p, self.kappa
        nonzero = rng.binomial(counts, 1.0 - (1 - p) / (1 - p * k))
        if k == 0.0:
            return nonzero.astype(np.int64)
        return _geometric_sum(nonzero, (1 - k) / (1 - p * k), rng)


def _geometric_sum(n_terms, success: float, rng) -> np.ndarray:
    """Sum of n_terms i.i.d. geometric variables on {1, 2, ...}."""
    n_terms = np.asarray(n_terms, dtype=np.int64)
    out = n_terms.copy()
    if success >= 1.0:
        return out
    nz = n_terms > 0
    if np.any(nz):
        out[nz] += rng.negative_binomial(n_terms[nz], success)
    return out


@dataclass(frozen=True)
class TwoSidedModGeometric(ThinningOp):
    """Two-sided operator S^{-1} ∘ B_p ∘ S2 with S2(z) = q S(z) + (1-q) S(1/z)."""

    p: float
    kappa: float = 0.0
    q: float = 1.0
    m: int = 1
    family: ClassVar[str] = "TwoSidedModGeometric"
    support_kind: ClassVar[str] = "two_sided"

    def __post_init__(self) -> None:
        _open_unit("p", self.p, self.family)
        _positive_int("m", self.m, self.family)
        if not (0.0 <= self.kappa < 1.0):
            raise DomainError(f"kappa must lie in [0,1) for {self.family}, got {self.kappa}")
        if not (0.0 <= self.q <= 1.0):
            raise DomainError(f"q must lie in [0,1] for {self.family}, got {self.q}")

    def _eval(self, z):
        s2 = self.q * _geo_S(z, self.kappa, self.m) + (1 - self.q) * _geo_S(1 / z, self.kappa, self.m)
        return _geo_S_inv(self.p * s2 + (1 - self.p), self.kappa, self.m)

    @property
    def radius_at_one(self):
        k, m = self.kappa, self.m
        if k == 0.0:
            return 1.0
        return min(1.0 - k ** (1.0 / m), (1.0 / k) ** (1.0 / m) - 1.0)

    def mean(self) -> float:
        return self.p * (2 * self.q - 1)

    def pmf(self, k_hi: int, k_lo: int | None = None) -> LaurentSeries:
        return extract_pmf(self.as_pgf(), -k_hi if k_lo is None else k_lo, k_hi)

    @cached_property
    def _table(self) -> TableSampler:
        k = 32
        while True:
            series = self.pmf(k)
            if series.total() >= 1.0 - TAIL_CUTOFF or k >= 2**18:
                break
            k *= 4
        if np.min(series.coeffs) < -1e-12:
            raise DomainError(f"{self!r} has negative extracted probabilities; not a PGF")
        return TableSampler(series.coeffs, series.k_min)


def cheb_theta(d, b):
    """arccos R(w) from d = 1 - w, via arccos x = 2 arcsin sqrt((1 - x)/2)."""
    u = (1.0 + b) * d / (1.0 - b + (1.0 + b) * d)
    return 2.0 * np.arcsin(np.sqrt(u))


@dataclass(frozen=True)
class ChebyshevThin(ThinningOp):
    """Chebyshev-type thinning R^{-1} ∘ T_p ∘ R on the lattice m."""

    p: float
    b: float = 0.0
    m: int = 1
    family: ClassVar[str] = "ChebyshevThin"

    def __post_init__(self) -> None:
        _open_unit("p", self.p, self.family)
        _positive_int("m", self.m, self.family)
        if not (-1.0 < self.b < 1.0):
            raise DomainError(f"b must lie in (-1,1) for {self.family}, got {self.b}")

    @property
    def proven(self) -> bool:
        """True on the subfamily p = 2^-k, b = 0, m = 1 with a known positivity proof."""
        k = -math.log2(self.p)
        return self.b == 0.0 and self.m == 1 and abs(k - round(k)) < 1e-12

    def _eval(self, z):
        return 1.0 - self.shifted(1.0 - np.asarray(z, dtype=complex))

    def shifted(self, c):
        b = self.b
        theta = cheb_theta(one_minus_pow(c, self.m), b)
        one_minus_y = 2.0 * np.sin(self.p * theta / 2.0) ** 2
        y = 1.0 - one_minus_y
        return one_minus_root((1.0 - b) * one_minus_y / ((1.0 + b) * (1.0 + y)), self.m)

    @property
    def radius_at_one(self):
        return 0.5 * ((2.0 / (1.0 + self.b)) ** (1.0 / self.m) - 1.0)

    def mean(self) -> float:
        return self.p**2


# ---------------------------------------------------------------------------
# Portlying families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DegeneratePortly(ThinningOp):
    n: int
    family: ClassVar[str] = "DegeneratePortly"
    index_name: ClassVar[str] = "n"

    def __post_init__(self) -> None:
        _positive_int("n", self.n, self.family)

    def _eval(self, z):
        return z**self.n

    @property
    def radius_at_one(self):
        return math.inf

    def mean(self) -> float:
        return float(self.n)

    def pmf(self, k_hi: int) -> LaurentSeries:
        c = np.zeros(k_hi + 1)
        if self.n <= k_hi:
            c[self.n] = 1.0
        return LaurentSeries(0, c)

    def draw_sum(self, counts, rng):
        return np.asarray(counts, dtype=np.int64) * self.n


@dataclass(frozen=True)
class GeometricPortly(ThinningOp):
    p: float
    family: ClassVar[str] = "GeometricPortly"

    def __post_init__(self) -> None:
        _open_unit("p", self.p, self.family)

    def _eval(self, z):
        return self.p * z / (1.0 - (1.0 - self.p) * z)

    def shifted(self, c):
        c = np.asarray(c, dtype=complex)
        return c / (self.p + (1.0 - self.p) * c)

    @property
    def radius_at_one(self):
        return self.p / (1.0 - self.p)

    def mean(self) -> float:
        return 1.0 / self.p

    def pmf(self, k_hi: int) -> LaurentSeries:
        c = np.zeros(k_hi + 1)
        n = np.arange(1, k_hi + 1)
        c[1:] = self.p * (1 - self.p) ** (n - 1)
        return LaurentSeries(0, c)

    def draw_sum(self, counts, rng):
        return _geometric_sum(counts, self.p, rng)


def _cheb_reversed(n: int, z):
    """z^n T_n(1/z) via T~_{k+1} = 2 T~_k - z^2 T~_{k-1}."""
    z2 = z * z
    prev = np.ones_like(z)
    cur = np.ones_like(z)
    for _ in range(1, n):
        prev, cur = cur, 2 * cur - z2 * prev
    return cur


@dataclass(frozen=True)
class ChebyshevPortly(ThinningOp):
    """Portlying operator (1 / T_n(1/z^m))^{1/m}."""

    n: int
    m: int = 1
    family: ClassVar[str] = "ChebyshevPortly"
    index_name: ClassVar[str] = "n"

    def __post_init__(self) -> None:
        _positive_int("n", self.n, self.family)
        _positive_int("m", self.m, self.family)

    def _eval(self, z):
        z = np.asarray(z, dtype=complex)
        w = z**self.m
        if self.m == 1:
            return w**self.n / _cheb_reversed(self.n, w)
        # z^n T_n(1/z) = 2^{n-1} prod_k (1 - x_k z) with every factor in the
        # right half-plane, so the root is taken factor by factor.
        nodes = np.cos((2 * np.arange(1, self.n + 1) - 1) * np.pi / (2 * self.n))
        root = np.full_like(w, 2.0 ** (-(self.n - 1) / self.m))
        for x_k in nodes:
            root = root * (1.0 - x_k * w) ** (-1.0 / self.m)
        return z**self.n * root

    def shifted(self, c):
        c = np.asarray(c, dtype=complex)
        if self.m > 1 and np.any(c.imag != 0):
            # Off the real axis the factored branch of _eval is authoritative.
            return super().shifted(c)
        flat = np.atleast_1d(c)
        out = np.atleast_1d(super().shifted(flat))
        near = np.abs(flat) < 0.5
        if np.any(near):
            d = one_minus_pow(flat[near], self.m)
            # 1/w = cosh(phi) with 2 sinh^2(phi/2) = d/(1-d); T_n(cosh phi) = cosh(n phi).
            phi = 2.0 * np.arcsinh(np.sqrt(d / (2.0 * (1.0 - d))))
            t = np.cosh(self.n * phi)
            out[near] = one_minus_root(2.0 * np.sinh(self.n * phi / 2.0) ** 2 / t, self.m)
        return out.reshape(c.shape) if c.ndim else out[0]

    @property
    def radius_at_one(self):
        if self.n == 1:
            return math.inf if self.m == 1 else 1.0
        pole = (1.0 / math.cos(math.pi / (2 * self.n))) ** (1.0 / self.m) - 1.0
        return pole if self.m == 1 else min(pole, 1.0)

    def mean(self) -> float:
        return float(self.n**2)


# ---------------------------------------------------------------------------
# Functional interface
# ---------------------------------------------------------------------------


def pgf_eval(op: ThinningOp, z):
    """Evaluate the operator's PGF at z."""
    return op.pgf(z)


def pmf(op: ThinningOp, k_hi: int) -> LaurentSeries:
    """PMF coefficients on [0, k_hi] ([-k_hi, k_hi] for two-sided operators)."""
    if k_hi < 0:
        raise DomainError("k_hi must be nonnegative")
    return op.pmf(k_hi)


def mean(op: ThinningOp) -> float:
    return op.mean()


_EXACT_PRODUCT = (Bernoulli, ModGeometric, ChebyshevThin, GeometricPortly)
_EXACT_INDEX_PRODUCT = (DegeneratePortly, ChebyshevPortly)


def compose_ops(a: ThinningOp, b: ThinningOp):
    """Compose two operators of one family; returns the closed-form member when known.

    Bernoulli, modified geometric, Chebyshev and geometric families multiply
    their p; degenerate and Chebyshev portlying multiply their n. Two-sided
    operators fall back to pointwise composition.
    """
    if type(a) is not type(b):
        raise FamilyMismatchError(f"cannot compose {a.family} with {b.family}")
    if a.shared_params() != b.shared_params():
        raise FamilyMismatchError(
            f"{a.family} operators must share fixed parameters: {a.shared_params()} vs {b.shared_params()}"
        )
    if isinstance(a, _EXACT_PRODUCT + _EXACT_INDEX_PRODUCT):
        return a.with_index(a.index * b.index)
    inner = b.as_pgf()
    return AnalyticPgf(
        lambda z: a._eval(np.asarray(inner.evaluator(z), dtype=complex)),
        a.support_kind,
        a.lattice,
        None,
        f"{a!r}∘{b!r}",
    )


def apply_thinning(op: ThinningOp, x, rng: np.random.Generator):
    """p ⊙ x: the sum of x independent draws from the operator's law.

    ``x`` may be a scalar or an integer array; the result matches its shape.
    """
    if isinstance(op, TwoSidedModGeometric):
        return apply_two_sided(op, x, rng)
    arr = np.asarray(x, dtype=np.int64)
    if np.any(arr < 0):
        raise DomainError("apply_thinning requires nonnegative counts")
    out = op.draw_sum(np.atleast_1d(arr), rng)
    return out.reshape(arr.shape) if arr.ndim else int(out[0])


def apply_two_sided(op: TwoSidedModGeometric, x, rng: np.random.Generator):
    """Thinned positive part minus thinned negative part."""
    if not isinstance(op, TwoSidedModGeometric):
        raise FamilyMismatchError("apply_two_sided needs a TwoSidedModGeometric operator")
    arr = np.asarray(x, dtype=np.int64)
    flat = np.atleast_1d(arr)
    out = op.draw_sum(np.abs(flat), rng) * np.sign(flat)
    return out.reshape(arr.shape) if arr.ndim else int(out[0])


def identity_op() -> AnalyticPgf:
    return identity_pgf()
