"""Special functions used by the closed-form probability and moment formulas.

Everything here is self-contained (numpy only) so that scipy and mpmath can
serve as independent oracles in the test-suite.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "log_gamma",
    "gamma_fn",
    "log_beta",
    "binom_real",
    "bessel_i",
    "bessel_ie",
    "kummer_1f1",
    "gauss_2f1",
    "laguerre_gen",
    "bell_partial",
    "bell_complete",
    "chebyshev_t",
]

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _log_gamma_ge_half(x: np.ndarray) -> np.ndarray:
    y = x - 1.0
    acc = np.full_like(y, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        acc = acc + _LANCZOS[i] / (y + i)
    t = y + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (y + 0.5) * np.log(t) - t + np.log(acc)


def log_gamma(x):
    """Natural log of the gamma function for x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("log_gamma requires finite x > 0")
    out = np.empty_like(arr)
    big = arr >= 0.5
    out[big] = _log_gamma_ge_half(arr[big])
    small = ~big
    if np.any(small):
        xs = arr[small]
        out[small] = np.log(np.pi / np.sin(np.pi * xs)) - _log_gamma_ge_half(1.0 - xs)
    return float(out) if out.ndim == 0 else out


def gamma_fn(x: float) -> float:
    """Gamma function on the real line, excluding the poles 0, -1, -2, ..."""
    if not math.isfinite(x):
        raise DomainError("gamma_fn requires a finite argument")
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"gamma_fn has a pole at {x}")
    if x > 0:
        if x > 171.6:
            raise OverflowError("gamma_fn overflows for x > 171.6")
        return math.exp(log_gamma(x))
    # Reflection for negative non-integers.
    return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))


def log_beta(x, y):
    """log B(x, y) for positive arguments."""
    return log_gamma(x) + log_gamma(y) - log_gamma(np.add(x, y))


def binom_real(a: float, k: int) -> float:
    """Generalised binomial coefficient a(a-1)...(a-k+1)/k!."""
    if k < 0 or int(k) != k:
        raise DomainError("binom_real requires a nonnegative integer k")
    k = int(k)
    if float(a).is_integer() and 0 <= a < k:
        return 0.0
    out = 1.0
    for i in range(k):
        out *= (a - i) / (i + 1)
    return out


def _bessel_ie_series(k: int, x: float) -> float:
    # e^{-x} * sum (x/2)^{2l+k} / (l! (l+k)!), built in log space for the prefactor.
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    half = 0.5 * x
    # log(x) - log 2 stays finite for subnormal x, where 0.5*x may underflow.
    log_lead = (k * (math.log(x) - math.log(2.0)) if k else 0.0) - math.lgamma(k + 1) - x
    term = 1.0
    total = 1.0
    q = half * half
    l = 0
    while True:
        l += 1
        term *= q / (l * (l + k))
        total += term
        if term < 1e-17 * total:
            break
    return math.exp(log_lead) * total


def _bessel_ie_miller(k: int, x: float) -> float:
    # Backward recurrence normalised by e^x = I_0 + 2 sum_{j>=1} I_j.
    start = k + int(math.sqrt(40.0 * (k + x))) + int(x) + 30
    start += start % 2
    i_next = 0.0
    i_cur = 1e-300
    norm = 0.0
    want = 0.0
    for j in range(start, 0, -1):
        i_prev = i_next + (2.0 * j / x) * i_cur
        i_next, i_cur = i_cur, i_prev
        if j - 1 == k:
            want = i_cur
        if j - 1 >= 1:
            norm += 2.0 * i_cur
        if abs(i_cur) > 1e250:
            i_next *= 1e-250
            i_cur *= 1e-250
            norm *= 1e-250
            want *= 1e-250
    norm += i_cur
    return want / norm


def bessel_ie(k: int, x: float) -> float:
    """Exponentially scaled modified Bessel function e^{-x} I_k(x), x >= 0."""
    if x < 0 or not math.isfinite(x):
        raise DomainError("bessel_ie requires finite x >= 0")
    k = abs(int(k))
    if x <= 15.0:
        return _bessel_ie_series(k, x)
    return _bessel_ie_miller(k, x)


def bessel_i(k: int, x: float) -> float:
    """Modified Bessel function of the first kind I_k(x) for integer k."""
    scaled = bessel_ie(k, x)
    if scaled == 0.0:
        return 0.0
    log_val = x + math.log(scaled)
    if log_val > 709.7:
        raise OverflowError(f"I_{k}({x}) exceeds the double range")
    return math.exp(log_val)


def _is_nonpositive_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def kummer_1f1(a: float, b: float, x: float, *, max_terms: int = 10_000) -> float:
    """Confluent hypergeometric function 1F1(a; b; x).

    Terminates when ``a`` is a nonpositive integer; otherwise the power series
    is summed to machine precision.
    """
    terminating = _is_nonpositive_int(a)
    n_stop = int(-a) if terminating else max_terms
    if _is_nonpositive_int(b) and (not terminating or n_stop > -b):
        raise DomainError(f"1F1 undefined: b={b} is a nonpositive integer")
    term = 1.0
    total = 1.0
    for n in range(n_stop):
        term *= (a + n) * x / ((b + n) * (n + 1))
        total += term
        if not terminating and abs(term) < 1e-17 * abs(total):
            return total
    if not terminating:
        raise DomainError("1F1 series did not converge; argument too large")
    return total


def gauss_2f1(a: float, b: float, c: float, x: float) -> float:
    """Terminating Gauss hypergeometric sum 2F1(a, b; c; x)."""
    if _is_nonpositive_int(a):
        n_stop = int(-a)
    elif _is_nonpositive_int(b):
        n_stop = int(-b)
    else:
        raise DomainError("gauss_2f1 only evaluates terminating series")
    if _is_nonpositive_int(c) and n_stop > -c:
        raise DomainError(f"2F1 undefined: c={c} is a nonpositive integer")
    term = 1.0
    total = 1.0
    for n in range(n_stop):
        term *= (a + n) * (b + n) * x / ((c + n) * (n + 1))
        total += term
    return total


def laguerre_gen(n: int, alpha: float, x: float) -> float:
    """Generalised Laguerre polynomial L_n^{(alpha)}(x) by three-term recurrence."""
    if n < 0:
        raise DomainError("laguerre_gen requires n >= 0")
    prev, cur = 1.0, 1.0 + alpha - x
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


@lru_cache(maxsize=None)
def _multiplicities(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All (j_1..j_{n-k+1}) with sum j_i = k and sum i*j_i = n."""
    width = n - k + 1
    found: list[tuple[int, ...]] = []

    def rec(i: int, parts_left: int, total_left: int, acc: list[int]) -> None:
        if i > width:
            if parts_left == 0 and total_left == 0:
                found.append(tuple(acc))
            return
        for j in range(min(parts_left, total_left // i) + 1):
            acc.append(j)
            rec(i + 1, parts_left - j, total_left - i * j, acc)
            acc.pop()

    rec(1, k, n, [])
    return tuple(found)


def bell_partial(n: int, k: int, x) -> float:
    """Partial Bell polynomial B_{n,k}(x_1, ..., x_{n-k+1})."""
    if not (1 <= k <= n):
        raise DomainError("bell_partial requires 1 <= k <= n")
    if n > 30:
        raise DomainError("bell_partial enumerates partitions only for n <= 30")
    xs = list(x)
    if len(xs) != n - k + 1:
        raise DomainError(f"bell_partial({n},{k}) needs {n - k + 1} arguments, got {len(xs)}")
    total = 0.0
    fact_n = math.factorial(n)
    for js in _multiplicities(n, k):
        coef = fact_n
        prod = 1.0
        for i, j in enumerate(js, start=1):
            if j:
                coef //= math.factorial(j) * math.factorial(i) ** j
                prod *= xs[i - 1] ** j
        total += coef * prod
    return total


def bell_complete(x) -> float:
    """Complete Bell polynomial B_n(x_1, ..., x_n) = sum_k B_{n,k}."""
    xs = list(x)
    n = len(xs)
    if n == 0:
        return 1.0
    return sum(bell_partial(n, k, xs[: n - k + 1]) for k in range(1, n + 1))


def chebyshev_t(p: float, x: float) -> float:
    """T_p(x) = cos(p arccos x); integer p also accepts |x| > 1."""
    if p <= 0:
        raise DomainError("chebyshev_t requires p > 0")
    if abs(x) <= 1.0:
        return math.cos(p * math.acos(x))
    if not float(p).is_integer():
        raise DomainError("chebyshev_t with non-integer p needs |x| <= 1")
    n = int(p)
    prev, cur = 1.0, x
    for _ in range(1, n):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur
