"""Probability mass functions: closed forms, series, asymptotics, CF inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .distributions import PDS, SDS, TPDS, DiscreteStableDist, FirstPassage, GeomPortlyStable
from .errors import DomainError, InstabilityError
from .series import LaurentSeries, pmf_from_cf
from .special_fn import bell_complete, bessel_ie, kummer_1f1, laguerre_gen, log_gamma

__all__ = [
    "PmfResult",
    "SeriesValue",
    "AsymptoticValue",
    "pmf_pds_gamma1",
    "pmf_pds_gamma1_kummer",
    "pmf_pds_gamma1_laguerre",
    "pmf_sds_gamma1",
    "pmf_sds_gamma1_vector",
    "pmf_sds_series",
    "pmf_first_passage",
    "pmf_first_passage_vector",
    "pmf_pds_tempered",
    "tempered_cumulants",
    "pmf_sds_asymptotic",
    "pmf_sds_asymptotic_simple",
    "pmf_sds_asymptotic_corrected",
    "pmf_cf",
    "pmf",
]

METHODS = ("closed_form", "series_sum", "cf_inversion", "asymptotic", "tempered_moments")
SDS_SERIES_MAX_LAMBDA = 30.0
TEMPERED_MAX_K = 20
_EPS = np.finfo(float).eps
_CHUNK = 1 << 14
_SERIES_MAX_TERMS = 1 << 21


@dataclass(frozen=True, eq=False)
class PmfResult:
    values: LaurentSeries
    method: str
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    @property
    def ks(self) -> np.ndarray:
        return self.values.ks

    @property
    def probs(self) -> np.ndarray:
        return self.values.coeffs


@dataclass(frozen=True)
class SeriesValue:
    value: float
    unstable: bool
    terms: int
    tail_estimate: float


@dataclass(frozen=True)
class AsymptoticValue:
    value: float
    order: float  # exponent e of the O(n^e) remainder
    error_estimate: float
    terms: int


def _check_lambda(lam: float) -> None:
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be positive, got {lam}")


def _logsumexp(a: np.ndarray) -> float:
    if len(a) == 0:
        return -math.inf
    top = float(np.max(a))
    return top + math.log(float(np.sum(np.exp(a - top))))


def _pds_gamma1_terms(lam: float, kappa: float, k: int) -> float:
    s = np.arange(k)
    lgam = np.array([math.lgamma(v) for v in range(1, k + 2)])
    # log of λ^{s+1}/(s+1)! · C(k-1, s) · κ^{k-s-1} (1-κ)^{s+1}
    logs = (
        (s + 1) * math.log(lam)
        - lgam[s + 1]
        + lgam[k - 1] - lgam[s] - lgam[k - 1 - s]
        + (k - s - 1) * math.log(kappa)
        + (s + 1) * math.log1p(-kappa)
    )
    return math.exp(-lam + _logsumexp(logs))


def pmf_pds_gamma1(lam: float, kappa: float, k_hi: int, m: int = 1) -> PmfResult:
    """PMF of PDS(1, λ, κ, m) on {0, ..., k_hi}, lattice points m·j."""
    _check_lambda(lam)
    if not 0.0 <= kappa < 1.0:
        raise DomainError(f"kappa must lie in [0,1), got {kappa}")
    if k_hi < 0:
        raise DomainError("k_hi must be nonnegative")
    j_hi = k_hi // m
    probs = np.empty(j_hi + 1)
    if kappa == 0.0:
        j = np.arange(j_hi + 1)
        lg = np.array([math.lgamma(v + 1) for v in j])
        probs[:] = np.exp(-lam + j * math.log(lam) - lg)
        route = "poisson"
    else:
        probs[0] = math.exp(-lam)
        for j in range(1, j_hi + 1):
            probs[j] = _pds_gamma1_terms(lam, kappa, j)
        route = "finite_sum"
    coeffs = np.zeros(k_hi + 1)
    coeffs[::m] = probs
    return PmfResult(LaurentSeries(0, coeffs, m), "closed_form", {"route": route})


def _kummer_prefactor(lam: float, kappa: float, k: int) -> tuple[float, float]:
    _check_lambda(lam)
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0,1) for the hypergeometric form, got {kappa}")
    if k < 1:
        raise DomainError("the hypergeometric form needs k >= 1")
    pre = math.exp(-lam + math.log(lam) + math.log1p(-kappa) + (k - 1) * math.log(kappa))
    return pre, lam * (kappa - 1.0) / kappa


def pmf_pds_gamma1_kummer(lam: float, kappa: float, k: int) -> float:
    """P(X = k), k >= 1, for PDS(1, λ, κ) via 1F1(1-k; 2; λ(κ-1)/κ)."""
    pre, x = _kummer_prefactor(lam, kappa, k)
    return pre * kummer_1f1(1 - k, 2, x)


def pmf_pds_gamma1_laguerre(lam: float, kappa: float, k: int) -> float:
    """Same probability via the Laguerre polynomial L^{(1)}_{k-1}."""
    pre, x = _kummer_prefactor(lam, kappa, k)
    return pre * laguerre_gen(k - 1, 1.0, x) / k


def pmf_sds_gamma1(lam: float, k: int) -> float:
    """e^{-λ} I_k(λ)."""
    _check_lambda(lam)
    return bessel_ie(abs(int(k)), lam)


def pmf_sds_gamma1_vector(lam: float, k_lo: int, k_hi: int) -> PmfResult:
    _check_lambda(lam)
    ks = range(k_lo, k_hi + 1)
    coeffs = np.array([bessel_ie(abs(k), lam) for k in ks])
    return PmfResult(LaurentSeries(k_lo, coeffs), "closed_form", {"route": "bessel"})


# --- symmetric series -------------------------------------------------------


def _log_abs_binom_and_sign(a: np.ndarray, i: np.ndarray):
    """log|C(a, i)| and its sign for real a >= 0 and integer i >= 0 (broadcast)."""
    a, i = np.broadcast_arrays(np.asarray(a, float), np.asarray(i, float))
    log_abs = np.full(a.shape, -np.inf)
    sign = np.zeros(a.shape)
    low = i <= a
    if np.any(low):
        al, il = a[low], i[low]
        log_abs[low] = log_gamma(al + 1) - log_gamma(il + 1) - log_gamma(al - il + 1)
        sign[low] = 1.0
    # i > a: reflect 1/Γ(a-i+1) = sin(π(a-i+1)) Γ(i-a) / π; zero for integer a.
    high = (~low) & (a != np.floor(a))
    if np.any(high):
        ah, ih = a[high], i[high]
        s = np.sin(np.pi * (ah - ih + 1))
        log_abs[high] = (
            log_gamma(ah + 1) + np.log(np.abs(s)) + log_gamma(ih - ah)
            - math.log(math.pi) - log_gamma(ih + 1)
        )
        sign[high] = np.sign(s)
    return log_abs, sign


def _steutel_coeffs(gamma: float, lam: float, i: np.ndarray, j_max: int):
    """a_i = Σ_j (-1)^{i+j} C(γj, i) λ^j / j!  plus Σ_j |term| for the cancellation check."""
    j = np.arange(j_max + 1, dtype=float)
    log_lj = j * math.log(lam) - np.array([math.lgamma(v + 1) for v in j])
    log_b, sign = _log_abs_binom_and_sign(gamma * j[None, :], i[:, None].astype(float))
    parity = np.where((i[:, None] + j[None, :].astype(int)) % 2 == 0, 1.0, -1.0)
    mags = np.exp(log_b + log_lj[None, :])
    terms = parity * sign * mags
    return terms.sum(axis=1), np.abs(terms).sum(axis=1)


def _walk_log_prob(i: np.ndarray, k: int) -> np.ndarray:
    """log[2^{-i} C(i, (i+k)/2)]; -inf where the parity does not match or |k| > i."""
    out = np.full(i.shape, -np.inf)
    ok = ((i + k) % 2 == 0) & (i >= abs(k))
    ii = i[ok].astype(float)
    up = (ii + k) / 2.0
    out[ok] = log_gamma(ii + 1) - log_gamma(up + 1) - log_gamma(ii - up + 1) - ii * math.log(2.0)
    return out


def _tail_exponents(gamma: float, span: float = 2.0) -> np.ndarray:
    # Terms behave like i^{-e} with e = γj + 3/2 + l (j >= 1, l >= 0).
    lead = gamma + 1.5
    out = []
    for j in range(1, 64):
        for l in range(0, 4):
            e = gamma * j + 1.5 + l
            if e <= lead + span and all(abs(e - f) > 1e-9 for f in out):
                out.append(e)
    return np.array(sorted(out))


def _extrapolated_tail(blocks: list[float], gamma: float) -> float:
    """Tail beyond the last dyadic block, fitting block sums to known power rates."""
    exps = _tail_exponents(gamma)
    n_fit = min(len(exps), len(blocks) - 2)
    if n_fit < 1:
        return math.inf
    exps = exps[:n_fit]
    rates = 2.0 ** (1.0 - exps)  # block-to-block ratio of a pure i^{-e} tail
    nb = len(blocks)
    rows = np.arange(nb - n_fit, nb)
    design = rates[None, :] ** (rows[:, None] - (nb - 1))
    coef = np.linalg.solve(design, np.asarray(blocks[nb - n_fit:]))
    return float(np.sum(coef * rates / (1.0 - rates)))


def pmf_sds_series(gamma: float, lam: float, k: int, tol: float = 1e-10) -> SeriesValue:
    """P(X = k) for SDS(γ, λ) from the double series over walk length i and Poisson index j.

    The j-sum is alternating; its loss of precision is tracked as
    eps·Σ|terms| and raises the ``unstable`` flag when it exceeds ``tol``.
    The i-sum decays algebraically; its tail is extrapolated from dyadic
    block sums using the known decay exponents.
    """
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"gamma must lie in (0,1], got {gamma}")
    _check_lambda(lam)
    if lam > SDS_SERIES_MAX_LAMBDA:
        raise InstabilityError(
            f"lambda={lam} exceeds {SDS_SERIES_MAX_LAMBDA}; the alternating series cancels "
            "catastrophically, use cf inversion instead"
        )
    k = int(k)
    j_max = int(lam + 12.0 * math.sqrt(lam) + 40.0)
    lo = abs(k)
    hi = max(2 * lo + 64, 128)
    total = 0.0
    abs_noise = 0.0
    blocks: list[float] = []
    history: list[float] = []
    tail = math.inf
    while True:
        block = 0.0
        last_a = np.zeros(0)
        for start in range(lo, hi, _CHUNK):
            i = np.arange(start, min(hi, start + _CHUNK))
            a, a_abs = _steutel_coeffs(gamma, lam, i, j_max)
            w = np.exp(_walk_log_prob(i, k))
            block += float(np.sum(a * w))
            abs_noise += float(np.sum(a_abs * w)) * _EPS * 4.0
            last_a = a
        total += block
        blocks.append(block)
        if gamma == 1.0:
            if np.all(np.abs(last_a[-8:]) < 1e-300):
                tail = 0.0
                break
        else:
            tail = _extrapolated_tail(blocks, gamma)
            history.append(total + tail)
            if len(history) >= 3 and max(
                abs(history[-1] - history[-2]), abs(history[-2] - history[-3])
            ) <= tol:
                break
        if hi >= _SERIES_MAX_TERMS:
            raise InstabilityError(
                f"SDS series tail did not settle within {_SERIES_MAX_TERMS} terms"
            )
        lo, hi = hi, 2 * hi
    return SeriesValue(total + tail, bool(abs_noise > tol), hi, tail)


# --- first passage ----------------------------------------------------------


def _first_passage_base(j_hi: int) -> np.ndarray:
    """P(T = 2j - 1) for j = 1..j_hi, T the passage time through +1."""
    j = np.arange(1, j_hi + 1, dtype=float)
    # (-1)^{j-1} C(1/2, j) = C(2j-2, j-1) / (j 2^{2j-1})
    logp = (
        log_gamma(2 * j - 1) - 2 * log_gamma(j) - np.log(j) - (2 * j - 1) * math.log(2.0)
    )
    return np.exp(logp)


def pmf_first_passage_vector(M: int, m: int, k_hi: int) -> PmfResult:
    """PMF of FirstPassage(M, m) on {0, ..., k_hi} by M-fold convolution."""
    FirstPassage(M, m)  # validates
    if k_hi < 0:
        raise DomainError("k_hi must be nonnegative")
    n_hi = k_hi // m  # walk-time units
    base = np.zeros(n_hi + 1)
    if n_hi >= 1:
        base[1::2] = _first_passage_base((n_hi + 1) // 2)
    out = np.zeros(n_hi + 1)
    out[0] = 1.0
    power, e = base, M
    while e:
        if e & 1:
            out = np.convolve(out, power)[: n_hi + 1]
        e >>= 1
        if e:
            power = np.convolve(power, power)[: n_hi + 1]
    coeffs = np.zeros(k_hi + 1)
    coeffs[::m] = out
    coeffs[np.abs(coeffs) < 1e-300] = 0.0
    return PmfResult(LaurentSeries(0, coeffs, m), "closed_form", {"route": "convolution"})


def pmf_first_passage(M: int, m: int, k: int) -> float:
    """P(X = k) for FirstPassage(M, m)."""
    if k < 0:
        return 0.0
    if M == 1:
        FirstPassage(M, m)
        if k % m or (k // m) % 2 == 0:
            return 0.0
        return float(_first_passage_base((k // m + 1) // 2)[-1])
    return pmf_first_passage_vector(M, m, k)[k]


# --- tempered-stable moment identity ----------------------------------------


def tempered_cumulants(gamma: float, theta: float, n: int) -> np.ndarray:
    """κ_1..κ_n of the law with CF exp{-(θ - it)^γ + θ^γ}.

    κ_j = (-1)^{j+1} γ(γ-1)...(γ-j+1) θ^{γ-j}, all positive for γ < 1.
    """
    out = np.empty(n)
    falling = 1.0
    for j in range(1, n + 1):
        falling *= gamma - (j - 1)
        out[j - 1] = (-1) ** (j + 1) * falling * theta ** (gamma - j)
    return out


def pmf_pds_tempered(gamma: float, lam: float, k: int) -> float:
    """P(X = k) for PDS(γ, λ) as e^{-λ} λ^{k/γ} E[Y^k] / k! with Y tempered stable."""
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0,1) for the tempered identity, got {gamma}")
    _check_lambda(lam)
    if not 0 <= k <= TEMPERED_MAX_K:
        raise DomainError(f"k must lie in [0,{TEMPERED_MAX_K}] for the tempered identity, got {k}")
    if k == 0:
        return math.exp(-lam)
    theta = lam ** (1.0 / gamma)
    moment = bell_complete(tempered_cumulants(gamma, theta, k))
    return math.exp(-lam + (k / gamma) * math.log(lam) - math.lgamma(k + 1)) * moment


# --- asymptotics ------------------------------------------------------------


def _asym_check(gamma: float, lam: float, n: int, terms: int) -> None:
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0,1) for the expansion, got {gamma}")
    _check_lambda(lam)
    if terms < 1:
        raise DomainError("terms must be >= 1")
    if n - gamma * terms <= 0:
        raise DomainError(f"n - gamma*terms = {n - gamma * terms} <= 0; reduce terms")


def _asym_sum(gamma, lam, terms, piece) -> float:
    total = 0.0
    for j in range(1, terms + 1):
        s = math.sin(gamma * j * math.pi)
        if abs(s) < 1e-15:
            continue
        total += (-1) ** (j + 1) * lam**j / math.factorial(j) * s * piece(j)
    return total / math.pi


def pmf_sds_asymptotic(gamma: float, lam: float, n: int, terms: int) -> AsymptoticValue:
    """Beta-function expansion with the leading-term 2^{-n} Bessel approximation."""
    _asym_check(gamma, lam, n, terms)
    n = abs(n)
    log2n = -n * math.log(2.0)

    def piece(j):
        x, y = gamma * j + 1, n - gamma * j
        return math.exp(log2n + log_gamma(x) + log_gamma(y) - log_gamma(x + y))

    order = -gamma * (terms + 1) - 1
    return AsymptoticValue(_asym_sum(gamma, lam, terms, piece), order, float(n) ** order, terms)


def pmf_sds_asymptotic_simple(gamma: float, lam: float, n: int) -> AsymptoticValue:
    """Power-law form with ⌊(γ+1)/γ⌋ terms and the same 2^{-n} factor."""
    terms = int(math.floor((gamma + 1.0) / gamma))
    _asym_check(gamma, lam, n, terms)
    n = abs(n)
    log2n = -n * math.log(2.0)

    def piece(j):
        return math.exp(log2n + log_gamma(gamma * j + 1) + (-gamma * j - 1) * math.log(n))

    order = -gamma - 2
    return AsymptoticValue(_asym_sum(gamma, lam, terms, piece), order, float(n) ** order, terms)


def pmf_sds_asymptotic_corrected(
    gamma: float, lam: float, n: int, terms: int | None = None, *, form: str = "gamma_ratio"
) -> AsymptoticValue:
    """Expansion using the exact integral ∫ e^{-s} I_n(s) s^{-γj-1} ds.

    That integral equals 2^{γj} Γ(1/2+γj) Γ(n-γj) / (√π Γ(n+1+γj)), so the
    j-th term decays like n^{-2γj-1}. ``form="power"`` replaces the gamma
    ratio by its leading power.
    """
    if terms is None:
        terms = int(math.floor((gamma + 1.0) / gamma))
    _asym_check(gamma, lam, n, terms)
    if form not in ("gamma_ratio", "power"):
        raise DomainError("form must be 'gamma_ratio' or 'power'")
    n = abs(n)

    def piece(j):
        g = gamma * j
        head = log_gamma(g + 1) + g * math.log(2.0) + log_gamma(0.5 + g) - 0.5 * math.log(math.pi)
        if form == "power":
            return math.exp(head + (-2 * g - 1) * math.log(n))
        return math.exp(head + log_gamma(n - g) - log_gamma(n + 1 + g))

    order = -2 * gamma * (terms + 1) - 1
    if form == "power":
        order = max(order, -2 * gamma - 2)
    return AsymptoticValue(_asym_sum(gamma, lam, terms, piece), order, float(n) ** order, terms)


# --- generic ----------------------------------------------------------------


def pmf_cf(
    dist: DiscreteStableDist, k_lo: int, k_hi: int, *, tol: float = 1e-10, n_grid: int = 4096
) -> PmfResult:
    """PMF window by inverting the characteristic function on the lattice."""
    if k_hi < k_lo:
        raise DomainError("k_lo must not exceed k_hi")
    res = pmf_from_cf(dist.char_fn, k_lo, k_hi, n_grid, lattice=dist.lattice, tol=tol)
    return PmfResult(res, "cf_inversion", {"aliasing_error": res.aliasing_error, "n_grid": res.n_grid})


def pmf(dist: DiscreteStableDist, k_lo: int, k_hi: int) -> PmfResult:
    """Best available PMF window: closed form when one exists, else CF inversion."""
    if k_hi < k_lo:
        raise DomainError("k_lo must not exceed k_hi")
    if isinstance(dist, PDS) and dist.gamma == 1.0 and k_lo >= 0:
        res = pmf_pds_gamma1(dist.lam, dist.kappa, k_hi, dist.m)
        return _window(res, k_lo, k_hi)
    if isinstance(dist, SDS) and dist.gamma == 1.0 and dist.kappa == 0.0 and dist.m == 1:
        return pmf_sds_gamma1_vector(dist.lam, k_lo, k_hi)
    if isinstance(dist, FirstPassage) and k_lo >= 0:
        return _window(pmf_first_passage_vector(dist.M, dist.m, k_hi), k_lo, k_hi)
    if isinstance(dist, (PDS, TPDS, FirstPassage)) and k_hi < 0:
        return PmfResult(LaurentSeries(k_lo, np.zeros(k_hi - k_lo + 1)), "closed_form", {})
    if isinstance(dist, GeomPortlyStable) and k_lo > 0:
        return PmfResult(LaurentSeries(k_lo, np.zeros(k_hi - k_lo + 1)), "closed_form", {})
    return pmf_cf(dist, k_lo, k_hi)


def _window(res: PmfResult, k_lo: int, k_hi: int) -> PmfResult:
    coeffs = res.values.window(k_lo, k_hi)
    return PmfResult(LaurentSeries(k_lo, coeffs, res.values.lattice), res.method, res.meta)
