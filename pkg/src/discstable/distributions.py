"""Discrete stable families as immutable parameter objects.

Every family evaluates its PGF through a log-exponent ``log_pgf`` so that
powers P(z)^n can be formed as exp(n log P(z)) without branch trouble.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, ClassVar

import numpy as np

from .errors import DomainError, FamilyMismatchError
from .series import AnalyticPgf, principal_power
from .thinning import ChebyshevThin, ModGeometric, ThinningOp, cheb_theta, one_minus_pow

__all__ = [
    "Support",
    "DiscreteStableDist",
    "PDS",
    "DS",
    "SDS",
    "TPDS",
    "GeomPortlyStable",
    "FirstPassage",
    "Degenerate",
    "pgf",
    "char_fn",
    "support",
    "ds_sum",
    "ds_negate",
    "from_dict",
    "to_dict",
    "FAMILIES",
]


@dataclass(frozen=True)
class Support:
    """Lattice support: ``{start + step*j}`` for j >= 0, or all multiples of ``step``."""

    kind: str  # nonnegative | nonpositive | integers | progression | point
    step: int = 1
    start: int = 0

    def contains(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.int64)
        if self.kind == "point":
            return v == self.start
        on_lattice = (v - self.start) % self.step == 0
        if self.kind == "integers":
            return on_lattice
        if self.kind == "nonpositive":
            return on_lattice & (v <= 0)
        return on_lattice & (v >= self.start)

    def describe(self) -> str:
        if self.kind == "point":
            return f"{{{self.start}}}"
        if self.kind == "integers":
            return f"{self.step}·ℤ"
        if self.kind == "nonpositive":
            return "−ℕ₀"
        if self.kind == "nonnegative":
            return f"{self.step}·ℕ₀"
        return f"{{{self.start}, {self.start + self.step}, {self.start + 2 * self.step}, …}}"


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


def _check_gamma(gamma: float, family: str, upper: float = 1.0) -> None:
    _check(0.0 < gamma <= upper, f"gamma must lie in (0,{upper:g}] for family {family}, got {gamma}")


def _check_lambda(lam: float, family: str) -> None:
    _check(lam > 0.0 and math.isfinite(lam), f"lambda must be positive for family {family}, got {lam}")


def _check_kappa(kappa: float, family: str) -> None:
    _check(0.0 <= kappa < 1.0, f"kappa must lie in [0,1) for family {family}, got {kappa}")


def _check_m(m, name: str, family: str) -> None:
    _check(
        isinstance(m, (int, np.integer)) and m >= 1,
        f"{name} must be a positive integer for family {family}, got {m}",
    )


def _geo(w, kappa):
    return (1.0 - kappa) * w / (1.0 - kappa * w)


@dataclass(frozen=True)
class DiscreteStableDist:
    """Shared behaviour; subclasses define ``log_pgf``."""

    family: ClassVar[str] = "abstract"
    support_kind: ClassVar[str] = "nonnegative"
    zero_forbidden: ClassVar[bool] = False

    def log_pgf(self, z: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def _eval(self, z: np.ndarray) -> np.ndarray:
        return np.exp(self.log_pgf(np.asarray(z, dtype=complex)))

    def log_pgf_shifted(self, c) -> np.ndarray:
        """log P(1 - c); overridden where the complement can be kept exact near z = 1."""
        return self.log_pgf(1.0 - np.asarray(c, dtype=complex))

    def pgf_shifted(self, c) -> np.ndarray:
        return np.exp(self.log_pgf_shifted(c))

    def _check_domain(self, z: np.ndarray) -> None:
        a = np.abs(z)
        if self.zero_forbidden and np.any(a == 0):
            raise DomainError(f"family {self.family} is undefined at z = 0")
        if self.support_kind == "nonnegative":
            if np.any(a > 1.0 + 1e-12):
                raise DomainError(f"family {self.family} needs |z| <= 1")
        elif self.support_kind == "nonpositive":
            # Re(1 - 1/z) >= 0, i.e. z outside the open disc |z - 1/2| < 1/2.
            if np.any(np.abs(z - 0.5) < 0.5 - 1e-12):
                raise DomainError(f"family {self.family} needs |z - 1/2| >= 1/2")
        else:
            on_circle = np.abs(a - 1.0) <= 1e-12
            positive_real = (np.abs(z.imag) <= 1e-15) & (z.real > 0) & (z.real <= 1.0 + 1e-12)
            if not np.all(on_circle | positive_real):
                raise DomainError(
                    f"family {self.family} is evaluated only on |z| = 1 or real z in (0,1]"
                )

    def pgf(self, z):
        """P(z) = E[z^X] on the family's domain (principal branches)."""
        z = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z)
        self._check_domain(flat)
        out = self._eval(flat)
        return out.reshape(z.shape) if z.ndim else complex(out[0])

    __call__ = pgf

    def char_fn(self, t):
        """f(t) = P(e^{it})."""
        t = np.asarray(t, dtype=float)
        out = np.exp(self.log_char_fn(np.atleast_1d(t)))
        return out.reshape(t.shape) if t.ndim else complex(out[0])

    def log_char_fn(self, t):
        t = np.asarray(t, dtype=float)
        # 1 - e^{it} = -expm1(it) keeps small t accurate.
        out = self.log_pgf_shifted(-np.expm1(1j * np.atleast_1d(t)))
        return out.reshape(t.shape) if t.ndim else complex(out[0])

    @property
    def lattice(self) -> int:
        return getattr(self, "m", 1)

    @property
    def radius_at_one(self) -> float | None:
        return None

    def as_pgf(self) -> AnalyticPgf:
        return AnalyticPgf(self._eval, self.support_kind, self.lattice, self.radius_at_one, repr(self))

    def support(self) -> Support:  # pragma: no cover - abstract
        raise NotImplementedError

    def with_params(self, **changes) -> "DiscreteStableDist":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = {"family": self.family}
        for f in fields(self):
            d[_JSON_NAME.get(f.name, f.name)] = getattr(self, f.name)
        return d


_JSON_NAME = {"lam": "lambda"}
_FIELD_NAME = {v: k for k, v in _JSON_NAME.items()}


@dataclass(frozen=True)
class PDS(DiscreteStableDist):
    """Positive discrete stable law with geometric-type thinning."""

    gamma: float
    lam: float
    kappa: float = 0.0
    m: int = 1
    family: ClassVar[str] = "PDS"

    def __post_init__(self) -> None:
        _check_gamma(self.gamma, self.family)
        _check_lambda(self.lam, self.family)
        _check_kappa(self.kappa, self.family)
        _check_m(self.m, "m", self.family)

    def log_pgf(self, z):
        w = z**self.m
        return -self.lam * principal_power((1.0 - w) / (1.0 - self.kappa * w), self.gamma)

    def log_pgf_shifted(self, c):
        d = one_minus_pow(c, self.m)
        k = self.kappa
        return -self.lam * principal_power(d / (1.0 - k + k * d), self.gamma)

    @property
    def radius_at_one(self):
        if self.gamma != 1.0:
            return None
        if self.kappa == 0.0:
            return math.inf
        return (1.0 / self.kappa) ** (1.0 / self.m) - 1.0

    def support(self) -> Support:
        return Support("nonnegative", self.m)

    def thinning_op(self, p: float) -> ThinningOp:
        return ModGeometric(p, self.kappa, self.m)


def _ds_parts(z, gamma, q, kappa, m):
    w = z**m
    s_in, s_out = _geo(w, kappa), _geo(1.0 / w, kappa)
    g = principal_power(1.0 - q * s_in - (1.0 - q) * s_out, gamma)
    h = principal_power(1.0 - (1.0 - q) * s_in - q * s_out, gamma)
    return g, h


@dataclass(frozen=True)
class DS(DiscreteStableDist):
    """Discrete stable law in the limit sense with two-sided geometric thinning."""

    gamma: float
    beta: float
    lam: float
    q: float = 1.0
    kappa: float = 0.0
    m: int = 1
    family: ClassVar[str] = "DS"
    support_kind: ClassVar[str] = "two_sided"
    zero_forbidden: ClassVar[bool] = True

    def __post_init__(self) -> None:
        _check_gamma(self.gamma, self.family)
        _check(-1.0 <= self.beta <= 1.0, f"beta must lie in [-1,1] for family DS, got {self.beta}")
        _check_lambda(self.lam, self.family)
        _check(0.0 <= self.q <= 1.0, f"q must lie in [0,1] for family DS, got {self.q}")
        _check_kappa(self.kappa, self.family)
        _check_m(self.m, "m", self.family)

    def exponent_parts(self, z):
        """The components g(z) and h(z) = g(1/z) of the log-PGF."""
        return _ds_parts(np.asarray(z, dtype=complex), self.gamma, self.q, self.kappa, self.m)

    def log_pgf(self, z):
        return self.log_pgf_shifted(1.0 - np.asarray(z, dtype=complex))

    def log_pgf_shifted(self, c):
        # With d = 1 - w: 1 - S(w) = d/(1-κ+κd) and 1 - S(1/w) = -d/(1-κ-d).
        # A component with zero weight is skipped: off the unit circle it may
        # leave the principal-branch domain while contributing nothing.
        d = one_minus_pow(np.asarray(c, dtype=complex), self.m)
        k = self.kappa
        inner = d / (1.0 - k + k * d)
        outer = -d / (1.0 - k - d)
        out = np.zeros_like(d)
        if self.beta != -1.0:
            g = principal_power(self.q * inner + (1.0 - self.q) * outer, self.gamma)
            out = out + 0.5 * (1.0 + self.beta) * g
        if self.beta != 1.0:
            h = principal_power((1.0 - self.q) * inner + self.q * outer, self.gamma)
            out = out + 0.5 * (1.0 - self.beta) * h
        return -self.lam * out

    @property
    def radius_at_one(self):
        return _two_sided_radius(self.gamma, self.kappa, self.m)

    def support(self) -> Support:
        return Support("integers", self.m)


def _two_sided_radius(gamma, kappa, m):
    if gamma != 1.0:
        return None
    if kappa == 0.0:
        return 1.0
    return min(1.0 - kappa ** (1.0 / m), (1.0 / kappa) ** (1.0 / m) - 1.0)


@dataclass(frozen=True)
class SDS(DiscreteStableDist):
    """Symmetric discrete stable law."""

    gamma: float
    lam: float
    kappa: float = 0.0
    m: int = 1
    family: ClassVar[str] = "SDS"
    support_kind: ClassVar[str] = "two_sided"
    zero_forbidden: ClassVar[bool] = True

    def __post_init__(self) -> None:
        _check_gamma(self.gamma, self.family)
        _check_lambda(self.lam, self.family)
        _check_kappa(self.kappa, self.family)
        _check_m(self.m, "m", self.family)

    def log_pgf(self, z):
        w = z**self.m
        k = self.kappa
        base = 1.0 - 0.5 * (1.0 - k) * (w / (1.0 - k * w) + (1.0 / w) / (1.0 - k / w))
        return -self.lam * principal_power(base, self.gamma)

    def char_fn(self, t):
        """Real-valued CF from the cosine form."""
        t = np.asarray(t, dtype=float)
        k = self.kappa
        c = np.cos(t * self.m)
        # 1 - (1-κ)(c-κ)/(κ²-2κc+1) rewritten without cancellation at c = 1
        base = (1.0 + k) * 2.0 * np.sin(0.5 * t * self.m) ** 2 / (k * k - 2.0 * k * c + 1.0)
        out = np.exp(-self.lam * base**self.gamma) + 0j
        return out if t.ndim else complex(out)

    def log_char_fn(self, t):
        t = np.asarray(t, dtype=float)
        k = self.kappa
        c = np.cos(t * self.m)
        base = (1.0 + k) * 2.0 * np.sin(0.5 * t * self.m) ** 2 / (k * k - 2.0 * k * c + 1.0)
        out = -self.lam * base**self.gamma + 0j
        return out if t.ndim else complex(out)

    @property
    def radius_at_one(self):
        return _two_sided_radius(self.gamma, self.kappa, self.m)

    def support(self) -> Support:
        return Support("integers", self.m)


@dataclass(frozen=True)
class TPDS(DiscreteStableDist):
    """Positive discrete stable law with Chebyshev-type thinning."""

    gamma: float
    lam: float
    b: float = 0.0
    m: int = 1
    family: ClassVar[str] = "TPDS"

    def __post_init__(self) -> None:
        _check_gamma(self.gamma, self.family, upper=2.0)
        _check_lambda(self.lam, self.family)
        _check(-1.0 < self.b < 1.0, f"b must lie in (-1,1) for family TPDS, got {self.b}")
        _check_m(self.m, "m", self.family)

    def log_pgf(self, z):
        return self.log_pgf_shifted(1.0 - np.asarray(z, dtype=complex))

    def log_pgf_shifted(self, c):
        theta = cheb_theta(one_minus_pow(c, self.m), self.b)
        return -self.lam * principal_power(theta, self.gamma)

    @property
    def radius_at_one(self):
        if self.gamma != 2.0:
            return None
        return (2.0 / (1.0 + self.b)) ** (1.0 / self.m) - 1.0

    def support(self) -> Support:
        return Support("nonnegative", self.m)

    def thinning_op(self, p: float) -> ThinningOp:
        return ChebyshevThin(p, self.b, self.m)


@dataclass(frozen=True)
class GeomPortlyStable(DiscreteStableDist):
    """exp{-λ(1 - 1/z)^γ}: stable in the second sense under geometric portlying."""

    gamma: float
    lam: float
    family: ClassVar[str] = "GeomPortlyStable"
    support_kind: ClassVar[str] = "nonpositive"
    zero_forbidden: ClassVar[bool] = True

    def __post_init__(self) -> None:
        _check_gamma(self.gamma, self.family)
        _check_lambda(self.lam, self.family)

    def log_pgf(self, z):
        return -self.lam * principal_power(1.0 - 1.0 / z, self.gamma)

    def log_pgf_shifted(self, c):
        c = np.asarray(c, dtype=complex)
        return -self.lam * principal_power(-c / (1.0 - c), self.gamma)

    @property
    def radius_at_one(self):
        return 1.0 if self.gamma == 1.0 else None

    def support(self) -> Support:
        return Support("nonpositive", 1)


@dataclass(frozen=True)
class FirstPassage(DiscreteStableDist):
    """((1 - sqrt(1 - z^{2m})) / z^m)^M: first passage of a fair walk through +M."""

    M: int = 1
    m: int = 1
    family: ClassVar[str] = "FirstPassage"
    zero_forbidden: ClassVar[bool] = True

    def __post_init__(self) -> None:
        _check_m(self.M, "M", self.family)
        _check_m(self.m, "m", self.family)

    def _base(self, z):
        w = np.asarray(z, dtype=complex) ** self.m
        # Same value as (1 - sqrt(1 - w^2))/w, without cancellation near w = 0.
        return w / (1.0 + np.sqrt(1.0 - w * w))

    def _eval(self, z):
        return self._base(z) ** self.M

    def log_pgf(self, z):
        return self.M * np.log(self._base(z))

    def log_pgf_shifted(self, c):
        c = np.asarray(c, dtype=complex)
        d = one_minus_pow(c, self.m)
        # Far from z = 1 the direct power is the accurate one.
        w = np.where(np.abs(c) < 0.5, 1.0 - d, (1.0 - c) ** self.m)
        return self.M * np.log(w / (1.0 + np.sqrt(d * (2.0 - d))))

    def support(self) -> Support:
        return Support("progression", 2 * self.m, self.M * self.m)


@dataclass(frozen=True)
class Degenerate(DiscreteStableDist):
    """Point mass at 1, P(z) = z."""

    family: ClassVar[str] = "Degenerate"

    def _eval(self, z):
        return np.asarray(z, dtype=complex)

    def log_pgf(self, z):
        return np.log(np.asarray(z, dtype=complex))

    @property
    def radius_at_one(self):
        return math.inf

    def support(self) -> Support:
        return Support("point", 1, 1)


FAMILIES: dict[str, type[DiscreteStableDist]] = {
    cls.family: cls for cls in (PDS, DS, SDS, TPDS, GeomPortlyStable, FirstPassage, Degenerate)
}
_INT_FIELDS = {"m", "M"}


def pgf(dist: DiscreteStableDist, z):
    return dist.pgf(z)


def char_fn(dist: DiscreteStableDist, t):
    return dist.char_fn(t)


def support(dist: DiscreteStableDist) -> Support:
    return dist.support()


def ds_sum(d1: DS, d2: DS) -> DS:
    """Law of X1 + X2 for independent DS variables sharing γ, q, κ, m."""
    if not (isinstance(d1, DS) and isinstance(d2, DS)):
        raise FamilyMismatchError("ds_sum needs two DS distributions")
    shared = ("gamma", "q", "kappa", "m")
    if any(getattr(d1, a) != getattr(d2, a) for a in shared):
        raise FamilyMismatchError("ds_sum requires equal gamma, q, kappa and m")
    lam = d1.lam + d2.lam
    beta = (d1.beta * d1.lam + d2.beta * d2.lam) / lam
    return replace(d1, lam=lam, beta=beta)


def ds_negate(d: DS) -> DS:
    """Law of -X."""
    if not isinstance(d, DS):
        raise FamilyMismatchError("ds_negate needs a DS distribution")
    return replace(d, beta=-d.beta)


def _coerce(name: str, value: Any, family: str):
    if name in _INT_FIELDS:
        if isinstance(value, bool) or not float(value).is_integer():
            raise DomainError(f"{name} must be a positive integer for family {family}, got {value}")
        return int(value)
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise DomainError(f"{name} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {value}")
    return v


def from_dict(data: dict[str, Any]) -> DiscreteStableDist:
    """Build a distribution from its JSON form; absent fields take defaults."""
    if not isinstance(data, dict) or "family" not in data:
        raise DomainError("distribution JSON needs a 'family' field")
    family = data["family"]
    cls = FAMILIES.get(family)
    if cls is None:
        raise DomainError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    allowed = {_JSON_NAME.get(f.name, f.name): f.name for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key == "family":
            continue
        if key not in allowed:
            raise DomainError(f"field {key!r} does not apply to family {family}")
        kwargs[allowed[key]] = _coerce(key, value, family)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        missing = [
            _JSON_NAME.get(f.name, f.name)
            for f in fields(cls)
            if f.name not in kwargs and f.default is f.default_factory
        ]
        raise DomainError(f"family {family} is missing required fields {missing}") from exc


def to_dict(dist: DiscreteStableDist) -> dict[str, Any]:
    return dist.to_dict()
