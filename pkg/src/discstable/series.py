"""Laurent-series engine: coefficient extraction, composition, CF inversion.

Coefficients are recovered from generating functions sampled on the unit
circle with an FFT; the grid is doubled until the coefficients stop moving,
which gives a computable aliasing bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BranchError, ConvergenceError, DomainError, DomainEscapeError

__all__ = [
    "LaurentSeries",
    "AnalyticPgf",
    "principal_power",
    "extract_pmf",
    "compose",
    "cf_eval",
    "numeric_factorial_moment",
    "pmf_from_cf",
    "identity_pgf",
]

SUPPORT_KINDS = ("nonnegative", "nonpositive", "two_sided")
CLAMP = 1e-14
DEFAULT_GRID = 4096
MAX_GRID = 2**24


def principal_power(w, gamma: float, tol: float = 1e-12):
    """w**gamma on the principal branch, refusing bases left of the imaginary axis.

    Every base raised to a fractional power in this library lies in the closed
    right half-plane; a base that strays across signals an evaluation outside
    the admissible domain.
    """
    w = np.asarray(w, dtype=complex)
    if gamma == 1.0:
        return w
    if np.any(w.real < -tol * np.maximum(1.0, np.abs(w))):
        raise BranchError("base of a fractional power left the closed right half-plane")
    return w**gamma


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Coefficients c_k for k = k_min .. k_min + len(coeffs) - 1."""

    k_min: int
    coeffs: np.ndarray
    lattice: int = 1
    aliasing_error: float = 0.0
    n_grid: int = 0

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.coeffs) - 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k: int) -> float:
        i = k - self.k_min
        if 0 <= i < len(self.coeffs):
            return float(self.coeffs[i])
        return 0.0

    def window(self, k_lo: int, k_hi: int) -> np.ndarray:
        """Coefficients on [k_lo, k_hi], zero outside the stored range."""
        return np.array([self[k] for k in range(k_lo, k_hi + 1)])

    def total(self) -> float:
        return float(np.sum(self.coeffs))

    def to_dict(self) -> dict[int, float]:
        return {int(k): float(c) for k, c in zip(self.ks, self.coeffs)}


@dataclass(frozen=True, eq=False)
class AnalyticPgf:
    """A generating function z -> E[z^X] together with its support type.

    ``radius_at_one`` is the distance from z = 1 to the nearest singularity
    of the analytic continuation (None if not analytic at 1).
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    support_kind: str = "nonnegative"
    lattice: int = 1
    radius_at_one: float | None = None
    label: str = field(default="pgf")

    def __post_init__(self) -> None:
        if self.support_kind not in SUPPORT_KINDS:
            raise DomainError(f"support_kind must be one of {SUPPORT_KINDS}")
        at_one = complex(np.asarray(self.evaluator(np.array([1.0 + 0j])))[0])
        if abs(at_one - 1.0) > 1e-12:
            raise DomainError(f"{self.label}: value at z=1 is {at_one}, not 1")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.evaluator(np.atleast_1d(z))
        return out.reshape(z.shape) if z.ndim else complex(out[0])

    @property
    def two_sided(self) -> bool:
        return self.support_kind != "nonnegative"


def identity_pgf() -> AnalyticPgf:
    return AnalyticPgf(lambda z: z, "nonnegative", 1, math.inf, "identity")


def _check_grid(n_grid: int) -> None:
    if n_grid < 2 or n_grid & (n_grid - 1):
        raise DomainError(f"n_grid must be a power of two, got {n_grid}")


def _next_pow2(n: int) -> int:
    return 1 << max(1, (n - 1).bit_length())


def _circle(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def _fft_window(values: np.ndarray, k_lo: int, k_hi: int) -> np.ndarray:
    n = len(values)
    c = np.fft.fft(values) / n
    idx = np.arange(k_lo, k_hi + 1) % n
    return c[idx].real


def _refine(sample: Callable[[int], np.ndarray], n: int, tol: float, max_grid: int):
    prev = sample(n)
    while True:
        n *= 2
        if n > max_grid:
            raise ConvergenceError(
                f"coefficients still moving by more than {tol:g} at n_grid={n // 2}"
            )
        cur = sample(n)
        change = float(np.max(np.abs(cur - prev))) if len(cur) else 0.0
        if change <= tol:
            return cur, change, n
        prev = cur


def _finish(c: np.ndarray) -> np.ndarray:
    c = c.copy()
    c[np.abs(c) < CLAMP] = 0.0
    return c


def extract_pmf(
    pgf: AnalyticPgf,
    k_lo: int,
    k_hi: int,
    n_grid: int = DEFAULT_GRID,
    *,
    tol: float = 1e-8,
    max_grid: int = MAX_GRID,
    radius: float = 1.0,
) -> LaurentSeries:
    """Coefficients c_k, k_lo <= k <= k_hi, of a generating function.

    The grid is widened to at least 4 * (k_hi - k_lo + 1) and then doubled
    until no coefficient changes by more than ``tol``. A ``radius`` below 1
    (one-sided supports only) samples a smaller circle, which makes aliasing
    decay geometrically when the PGF is not smooth on the unit circle.
    """
    if k_hi < k_lo:
        raise DomainError("extract_pmf requires k_lo <= k_hi")
    _check_grid(n_grid)
    if not 0.0 < radius <= 1.0:
        raise DomainError("radius must lie in (0,1]")
    if radius < 1.0 and pgf.support_kind != "nonnegative":
        raise DomainError("a radius below 1 needs a nonnegative support")
    n = max(n_grid, _next_pow2(4 * (k_hi - k_lo + 1)))
    scale = radius ** -np.arange(k_lo, k_hi + 1, dtype=float)

    def sample(m: int) -> np.ndarray:
        vals = np.asarray(pgf.evaluator(radius * _circle(m)), dtype=complex)
        return _fft_window(vals, k_lo, k_hi) * scale

    c, change, used = _refine(sample, n, tol, max_grid)
    return LaurentSeries(k_lo, _finish(c), pgf.lattice, change, used)


def pmf_from_cf(
    cf: Callable[[np.ndarray], np.ndarray],
    k_lo: int,
    k_hi: int,
    n_grid: int = DEFAULT_GRID,
    *,
    lattice: int = 1,
    tol: float = 1e-8,
    max_grid: int = MAX_GRID,
) -> LaurentSeries:
    """Lattice inversion p_k = (1/2pi) int_{-pi}^{pi} f(t) e^{-ikt} dt.

    Uses the midpoint rule on t_j = 2pi(j + 1/2)/n, so aliased mass enters
    with alternating sign, unlike the endpoint grid of ``extract_pmf``.
    """
    if k_hi < k_lo:
        raise DomainError("pmf_from_cf requires k_lo <= k_hi")
    _check_grid(n_grid)
    n = max(n_grid, _next_pow2(4 * (k_hi - k_lo + 1)))
    ks = np.arange(k_lo, k_hi + 1)

    def sample(m: int) -> np.ndarray:
        t = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        vals = np.asarray(cf(t), dtype=complex)
        c = np.fft.fft(vals) / m
        return (c[ks % m] * np.exp(-1j * np.pi * ks / m)).real

    c, change, used = _refine(sample, n, tol, max_grid)
    return LaurentSeries(k_lo, _finish(c), lattice, change, used)


def _check_points(kind: str) -> np.ndarray:
    circle = _circle(64)
    if kind != "nonnegative":
        return circle
    radial = np.linspace(0.0, 1.0, 33)
    return np.concatenate([circle, radial + 0j, 0.5 * circle])


def compose(outer: AnalyticPgf, inner: AnalyticPgf) -> AnalyticPgf:
    """Pointwise composition outer(inner(z)).

    ``inner`` must keep the check grid inside the closed unit disc.
    """
    pts = _check_points(inner.support_kind)
    vals = np.asarray(inner.evaluator(pts))
    worst = float(np.max(np.abs(vals)))
    if worst > 1.0 + 1e-12:
        raise DomainEscapeError(f"inner generating function reaches |Q(z)| = {worst:.6g} > 1")

    def evaluator(z: np.ndarray) -> np.ndarray:
        return outer.evaluator(np.asarray(inner.evaluator(z), dtype=complex))

    kind = inner.support_kind if outer.support_kind == "nonnegative" else "two_sided"
    radius = None
    if outer.radius_at_one == math.inf and inner.radius_at_one == math.inf:
        radius = math.inf
    return AnalyticPgf(
        evaluator, kind, inner.lattice, radius, f"{outer.label}∘{inner.label}"
    )


def cf_eval(dist_pgf: AnalyticPgf, t):
    """Characteristic function t -> P(e^{it})."""
    return dist_pgf(np.exp(1j * np.asarray(t, dtype=float)))


def _cauchy_coefficient(pgf: AnalyticPgf, n: int, r: float, m: int) -> tuple[float, float]:
    theta = 2.0 * np.pi * np.arange(m) / m
    w = np.exp(1j * theta)
    vals = np.asarray(pgf.evaluator(1.0 + r * w), dtype=complex)
    a = np.mean(vals * w ** (-n)).real / r**n
    scale = float(np.max(np.abs(vals))) / r**n
    return a, scale


def numeric_factorial_moment(
    pgf: AnalyticPgf, n: int, *, radius: float | None = None, rtol: float = 1e-5
) -> float:
    """n-th derivative of the PGF at z = 1 via the Cauchy integral.

    The circle is centred at 1 with radius half the declared analyticity
    radius (capped at 1/2). A second circle of half that radius must agree
    within ``rtol`` relative.
    """
    if n < 1:
        raise DomainError("numeric_factorial_moment requires n >= 1")
    reach = radius if radius is not None else pgf.radius_at_one
    if reach is None or reach <= 0:
        raise DomainError(f"{pgf.label} is not analytic at z=1; factorial moments unavailable")
    r0 = min(0.5 * reach, 0.5)
    results = []
    for r in (r0, 0.5 * r0):
        m = 64
        a_prev, scale = _cauchy_coefficient(pgf, n, r, m)
        while True:
            m *= 2
            a, scale = _cauchy_coefficient(pgf, n, r, m)
            if abs(a - a_prev) <= 1e-13 * max(abs(a), 1e-3 * scale):
                break
            if m > 2**16:
                raise ConvergenceError("Cauchy integral for the factorial moment did not settle")
            a_prev = a
        results.append((a * math.factorial(n), scale * math.factorial(n)))
    (v1, s1), (v2, s2) = results
    noise = 1e-12 * max(s1, s2)
    if abs(v1 - v2) > rtol * max(abs(v1), abs(v2)) + noise:
        raise ConvergenceError(
            f"factorial moment estimates disagree: {v1!r} vs {v2!r} (radii {r0}, {r0 / 2})"
        )
    return v1 if abs(v1) > noise else 0.0
