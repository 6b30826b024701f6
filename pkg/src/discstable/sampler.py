"""Exact samplers built on compound Poisson sums with positive-stable intensity.

All draws are vectorised: each public sampler takes ``size`` and returns an
int64 array (or a Python int when ``size`` is None).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import special

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
from .errors import DomainError, SampleOverflowError
from .series import AnalyticPgf, extract_pmf
from .thinning import TableSampler, _sum_groups, cheb_theta

__all__ = [
    "RandomStream",
    "SampleBatch",
    "sample_positive_stable",
    "sample_pds",
    "sample_sds",
    "sample_ds",
    "sample_tpds",
    "sample_first_passage",
    "sample_geom_portly_stable",
    "sample_pds_mixture_identity",
    "sample",
]

# Above this mean, Poisson/negative-binomial counts use the normal limit;
# the discretisation error is far below one unit relative to the spread.
_BIG_MEAN = 1e15
_INT_LIMIT = 2**62
_TAIL_TABLE = 1 << 16
_JUMP_CHUNK = 1 << 24
_MAX_JUMPS = 1 << 32


class RandomStream:
    """A reproducible substream: PCG64 keyed by (seed, stream_id)."""

    def __init__(self, seed: int, stream_id: int = 0) -> None:
        if not (0 <= int(seed) < 2**64 and 0 <= int(stream_id) < 2**64):
            raise DomainError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def spawn(self, stream_id: int) -> "RandomStream":
        return RandomStream(self.seed, stream_id)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise DomainError("rng must be a RandomStream or numpy Generator")


@dataclass(frozen=True, eq=False)
class SampleBatch:
    values: np.ndarray
    dist: DiscreteStableDist
    representation: str
    seed: int | None
    stream_id: int | None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not np.all(self.dist.support().contains(self.values)):
            raise AssertionError("sampled values outside the support")

    def to_dict(self) -> dict[str, Any]:
        return {
            "dist": self.dist.to_dict(),
            "representation": self.representation,
            "seed": self.seed,
            "stream_id": self.stream_id,
            "meta": self.meta,
            "values": [int(v) for v in self.values],
        }


# --- primitive counts -------------------------------------------------------


def _poisson(g: np.random.Generator, mu: np.ndarray) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    out = np.empty(mu.shape, dtype=np.int64)
    small = mu <= _BIG_MEAN
    out[small] = g.poisson(mu[small])
    big = ~small
    if np.any(big):
        if np.any(mu[big] > _INT_LIMIT):
            raise SampleOverflowError("Poisson intensity exceeds the int64 range")
        z = g.standard_normal(int(big.sum()))
        out[big] = np.rint(mu[big] + np.sqrt(mu[big]) * z).astype(np.int64)
    return out


def _negbin(g: np.random.Generator, n: np.ndarray, p: float | np.ndarray) -> np.ndarray:
    """Failures before the n-th success, vectorised, zero where n = 0."""
    n = np.asarray(n)
    p = np.broadcast_to(np.asarray(p, dtype=float), n.shape)
    out = np.zeros(n.shape, dtype=np.int64)
    act = n > 0
    if not np.any(act):
        return out
    na, pa = n[act].astype(float), p[act]
    mean = na * (1.0 - pa) / pa
    res = np.empty(na.shape, dtype=np.int64)
    small = mean <= _BIG_MEAN
    res[small] = g.negative_binomial(na[small], pa[small])
    big = ~small
    if np.any(big):
        if np.any(mean[big] > _INT_LIMIT):
            raise SampleOverflowError("negative-binomial count exceeds the int64 range")
        sd = np.sqrt(mean[big] / pa[big])
        res[big] = np.rint(mean[big] + sd * g.standard_normal(int(big.sum()))).astype(np.int64)
    out[act] = res
    return out


def _binomial_half(g: np.random.Generator, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    out = np.empty(n.shape, dtype=np.int64)
    small = n <= _BIG_MEAN
    out[small] = g.binomial(n[small], 0.5)
    big = ~small
    if np.any(big):
        nb = n[big].astype(float)
        draw = np.rint(0.5 * nb + 0.5 * np.sqrt(nb) * g.standard_normal(int(big.sum())))
        out[big] = np.clip(draw, 0, nb).astype(np.int64)
    return out


def _geometric_total(g, counts: np.ndarray, kappa: float) -> np.ndarray:
    """Sum of ``counts`` geometric(1-κ) variables on {1, 2, ...}."""
    counts = np.asarray(counts, dtype=np.int64)
    if kappa == 0.0:
        return counts.copy()
    return counts + _negbin(g, counts, 1.0 - kappa)


def _scale(values: np.ndarray, m: int) -> np.ndarray:
    if m != 1:
        if np.any(np.abs(values) > _INT_LIMIT // m):
            raise SampleOverflowError("scaled sample exceeds the int64 range")
        values = values * m
    return values


def _shape(out: np.ndarray, size):
    if size is None:
        return int(out[0])
    return out.reshape(size)


def _count(size) -> int:
    if size is None:
        return 1
    return int(np.prod(size))


# --- positive stable --------------------------------------------------------


def _positive_stable(g: np.random.Generator, gamma: float, n: int) -> np.ndarray:
    if gamma == 1.0:
        return np.ones(n)
    u = g.random(n)
    # Guard the open interval; the density of u near 0 or 1 is irrelevant.
    u = np.clip(u, 1e-300, 1.0 - 1e-16)
    e = g.standard_exponential(n)
    log_a = (
        gamma * np.log(np.sin(gamma * np.pi * u))
        + (1.0 - gamma) * np.log(np.sin((1.0 - gamma) * np.pi * u))
        - np.log(np.sin(np.pi * u))
    ) / (1.0 - gamma)
    return np.exp((1.0 - gamma) / gamma * (log_a - np.log(e)))


def sample_positive_stable(gamma: float, rng, size=None):
    """Draws of S_γ with E exp(-u S_γ) = exp(-u^γ) (Kanter's representation)."""
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"gamma must lie in (0,1], got {gamma}")
    out = _positive_stable(_gen(rng), gamma, _count(size))
    return float(out[0]) if size is None else out.reshape(size)


def _stable_intensity(g, gamma: float, lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if gamma == 1.0:
        return lam.copy()
    return lam ** (1.0 / gamma) * _positive_stable(g, gamma, lam.size).reshape(lam.shape)


# --- PDS / SDS / DS -----------------------------------------------------------


def _pds_core(g, gamma, lam: np.ndarray, kappa) -> np.ndarray:
    n = _poisson(g, _stable_intensity(g, gamma, lam))
    return _geometric_total(g, n, kappa)


def sample_pds(gamma: float, lam: float, kappa: float = 0.0, m: int = 1, rng=None, size=None):
    """PDS draws: Poisson(λ^{1/γ} S_γ) many geometric(1-κ) jumps, scaled by m."""
    PDS(gamma, lam, kappa, m)
    g = _gen(rng)
    n = _count(size)
    out = _pds_core(g, gamma, np.full(n, float(lam)), kappa)
    return _shape(_scale(out, m), size)


def _two_sided_jumps(g, counts: np.ndarray, q: float, kappa: float) -> np.ndarray:
    """Sum of ``counts`` jumps: +geometric w.p. q, -geometric w.p. 1-q."""
    if q == 0.5:
        up = _binomial_half(g, counts)
    else:
        up = g.binomial(counts, q)
    down = counts - up
    return _geometric_total(g, up, kappa) - _geometric_total(g, down, kappa)


def sample_sds(gamma: float, lam: float, kappa: float = 0.0, m: int = 1, rng=None, size=None):
    """SDS draws: Poisson(λ^{1/γ} S_γ) many symmetric two-sided geometric jumps."""
    SDS(gamma, lam, kappa, m)
    g = _gen(rng)
    n = _count(size)
    counts = _poisson(g, _stable_intensity(g, gamma, np.full(n, float(lam))))
    return _shape(_scale(_two_sided_jumps(g, counts, 0.5, kappa), m), size)


def sample_ds(
    gamma: float,
    beta: float,
    lam: float,
    q: float = 1.0,
    kappa: float = 0.0,
    m: int = 1,
    rng=None,
    size=None,
):
    """DS draws as C1 - C2, independent compound Poisson parts with weights (1±β)/2."""
    DS(gamma, beta, lam, q, kappa, m)
    g = _gen(rng)
    n = _count(size)
    out = np.zeros(n, dtype=np.int64)
    for weight, sign in ((0.5 * (1.0 + beta), 1), (0.5 * (1.0 - beta), -1)):
        if weight == 0.0:
            continue
        counts = _poisson(g, _stable_intensity(g, gamma, np.full(n, lam * weight)))
        out += sign * _two_sided_jumps(g, counts, q, kappa)
    return _shape(_scale(out, m), size)


def sample_geom_portly_stable(gamma: float, lam: float, rng=None, size=None):
    """exp{-λ(1-1/z)^γ} is the PGF of -PDS(γ, λ, 0)."""
    GeomPortlyStable(gamma, lam)
    g = _gen(rng)
    out = -_pds_core(g, gamma, np.full(_count(size), float(lam)), 0.0)
    return _shape(out, size)


def sample_pds_mixture_identity(
    gamma_prime: float, gamma: float, lam: float, kappa: float = 0.0, m: int = 1, rng=None, size=None
):
    """PDS(γ', λ, κ) drawn as PDS(γ'/γ, λ^{1/γ} S_γ, κ) with a fresh S_γ per draw."""
    if not 0.0 < gamma_prime <= gamma <= 1.0:
        raise DomainError(f"need 0 < gamma' <= gamma <= 1, got {gamma_prime}, {gamma}")
    PDS(gamma_prime, lam, kappa, m)
    g = _gen(rng)
    n = _count(size)
    inner_lam = _stable_intensity(g, gamma, np.full(n, float(lam)))
    inner_lam = np.maximum(inner_lam, np.finfo(float).tiny)
    out = _pds_core(g, gamma_prime / gamma, inner_lam, kappa)
    return _shape(_scale(out, m), size)


# --- TPDS -------------------------------------------------------------------


@lru_cache(maxsize=32)
def _arccos_jump_table(b: float) -> tuple[TableSampler, float, int]:
    """Table for the jump PGF 1 - arccos(R(z))/π, b != 0, plus its tail mass."""
    pgf = AnalyticPgf(lambda z: 1.0 - cheb_theta(1.0 - z, b) / np.pi, "nonnegative", 1, None)
    k_hi = _TAIL_TABLE
    series = extract_pmf(pgf, 0, k_hi, tol=1e-11, radius=1.0 - 4.0 / k_hi, max_grid=2**22)
    probs = series.coeffs
    if np.min(probs) < -1e-12:
        raise DomainError(f"TPDS jump law has negative mass for b={b}; parameters not admissible")
    probs = np.clip(probs, 0.0, None)
    tail = max(0.0, 1.0 - float(probs.sum()))
    return TableSampler(np.append(probs, tail)), tail, k_hi


def _chunked_sum(counts: np.ndarray, draw_sums) -> np.ndarray:
    """Apply ``draw_sums`` to the counts in pieces of at most _JUMP_CHUNK jumps.

    Counts above the chunk size are split across pieces and summed back, so
    memory stays bounded however heavy the intensity tail is.
    """
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total <= _JUMP_CHUNK:
        return draw_sums(counts)
    if total > _MAX_JUMPS:
        raise SampleOverflowError(
            f"{total} jumps requested in one batch (limit {_MAX_JUMPS}); reduce lambda or size"
        )
    reps = np.maximum(1, -(-counts // _JUMP_CHUNK))
    owner = np.repeat(np.arange(counts.size), reps)
    first = np.repeat(np.cumsum(reps) - reps, reps)
    slot = np.arange(owner.size) - first
    pieces = np.repeat(counts // reps, reps) + (slot < np.repeat(counts % reps, reps))
    out = np.zeros(counts.size, dtype=np.int64)
    cum = np.cumsum(pieces)
    start = 0
    while start < pieces.size:
        base = int(cum[start - 1]) if start else 0
        end = max(int(np.searchsorted(cum, base + _JUMP_CHUNK, side="right")), start + 1)
        np.add.at(out, owner[start:end], draw_sums(pieces[start:end]))
        start = end
    return out


def _arccos_jumps_sum(g, counts: np.ndarray, b: float) -> np.ndarray:
    """Sum of ``counts`` jumps with PGF 1 - arccos(R_b(z))/π."""
    return _chunked_sum(counts, lambda c: _arccos_jumps_chunk(g, c, b))


def _arccos_jumps_chunk(g, counts: np.ndarray, b: float) -> np.ndarray:
    total = int(counts.sum())
    if b == 0.0:
        # 1/2 + arcsin(R(z))/π: zero w.p. 1/2, else K geometric(1/2) steps with
        # K = 2n+1, n ~ NegBin(1/2, cos²θ), θ ~ U(0, π/2).
        live = g.random(total) < 0.5
        k_live = int(live.sum())
        theta = g.random(k_live) * (0.5 * np.pi)
        p = np.cos(theta) ** 2
        p = np.maximum(p, 1e-300)
        k = 2 * _negbin(g, np.full(k_live, 0.5), p) + 1
        vals = np.zeros(total, dtype=np.int64)
        vals[live] = k + _negbin(g, k, 0.5)
    else:
        table, tail, k_hi = _arccos_jump_table(b)
        vals = table.draw(total, g)
        far = vals == k_hi + 1
        if np.any(far):
            # Beyond the table the mass function decays like n^{-3/2}.
            u = g.random(int(far.sum()))
            vals[far] = np.ceil((k_hi + 1) / np.maximum(u, 1e-300) ** 2).astype(np.int64)
    return _sum_groups(vals, counts)


@lru_cache(maxsize=32)
def _arccos_sq_jump_table(b: float) -> tuple[TableSampler, float]:
    """Jump table for TPDS(2): h = arccos²(R(z)), jumps with PGF 1 - h(z)/h(0)."""
    h0 = float(np.arccos(-b)) ** 2

    def jump(z):
        return 1.0 - cheb_theta(1.0 - z, b) ** 2 / h0

    pgf = AnalyticPgf(jump, "nonnegative", 1, None)
    k_hi = 256
    while True:
        series = extract_pmf(pgf, 0, k_hi, tol=1e-13)
        if series.total() >= 1.0 - 1e-13 or k_hi >= 2**20:
            break
        k_hi *= 4
    if np.min(series.coeffs) < -1e-12:
        raise DomainError(f"TPDS(2) jump law has negative mass for b={b}")
    return TableSampler(series.coeffs), h0


def _tpds_core(g, gamma: float, lam: np.ndarray, b: float, gamma_base: float) -> np.ndarray:
    if gamma_base == gamma / 2.0:
        # exp{-λ (arccos²)^{γ/2}}: stable intensity over a TPDS(2) compound Poisson.
        table, h0 = _arccos_sq_jump_table(b)
        mu = _stable_intensity(g, gamma_base, lam)
        counts = _poisson(g, mu * h0)
        return _table_sum(g, table, counts)
    if gamma_base == gamma:
        counts = _poisson(g, np.pi * _stable_intensity(g, gamma, lam))
        return _arccos_jumps_sum(g, counts, b)
    # Nested: S_{γ_base} randomises the intensity of a TPDS(γ/γ_base).
    inner = _stable_intensity(g, gamma_base, lam)
    inner = np.maximum(inner, np.finfo(float).tiny)
    return _tpds_core(g, gamma / gamma_base, inner, b, gamma / gamma_base)


def _table_sum(g, table: TableSampler, counts: np.ndarray) -> np.ndarray:
    return _chunked_sum(counts, lambda c: _sum_groups(table.draw(int(c.sum()), g), c))


def default_gamma_base(gamma: float) -> float:
    return gamma if gamma <= 1.0 else gamma / 2.0


def sample_tpds(
    gamma: float, lam: float, b: float = 0.0, m: int = 1, rng=None, size=None, *, gamma_base=None
):
    """TPDS draws.

    γ_base = γ (γ <= 1): Poisson(π λ^{1/γ} S_γ) jumps with PGF 1 - arccos(R(z))/π.
    γ_base = γ/2 (any γ): Poisson(h(0) λ^{2/γ} S_{γ/2}) jumps with PGF 1 - h(z)/h(0),
    h = arccos²∘R. Other γ_base in (γ, 1] nest the two.
    """
    TPDS(gamma, lam, b, m)
    if gamma_base is None:
        gamma_base = default_gamma_base(gamma)
    ok = gamma_base == gamma / 2.0 or (gamma <= gamma_base <= 1.0)
    if not ok:
        raise DomainError(
            f"gamma_base must equal gamma/2 or lie in [gamma, 1]; got {gamma_base} for gamma={gamma}"
        )
    g = _gen(rng)
    out = _tpds_core(g, gamma, np.full(_count(size), float(lam)), b, gamma_base)
    return _shape(_scale(out, m), size)


# --- first passage ----------------------------------------------------------


def _log_u2n(n: np.ndarray) -> np.ndarray:
    """log P(walk stays <= 0 for 2n steps) = log C(2n,n) - 2n log 2."""
    n = np.asarray(n, dtype=float)
    out = np.empty(n.shape)
    small = n < 64
    ns = n[small]
    out[small] = special.gammaln(2 * ns + 1) - 2 * special.gammaln(ns + 1) - 2 * ns * math.log(2.0)
    nb = n[~small]
    out[~small] = -0.5 * np.log(np.pi * nb) - 1.0 / (8 * nb) + 1.0 / (192 * nb**3)
    return out


def _passage_one(g, count: int) -> np.ndarray:
    """Passage times through +1 by inverse CDF: T = 2J - 1 with P(J > n) = u_{2n}."""
    u = g.random(count)
    u = np.maximum(u, 1e-300)
    log_u = np.log(u)
    hi_f = np.ceil(2.0 / (np.pi * u * u)) + 2.0
    if np.any(hi_f > _INT_LIMIT / 4):
        raise SampleOverflowError("first-passage time exceeds the int64 range")
    lo = np.zeros(count, dtype=np.int64)  # P(J > lo) = u_{2lo} > u always (lo=0)
    hi = hi_f.astype(np.int64)  # u_{2hi} <= u
    while True:
        active = hi - lo > 1
        if not np.any(active):
            break
        mid = (lo + hi) // 2
        le = _log_u2n(mid) <= log_u
        hi = np.where(active & le, mid, hi)
        lo = np.where(active & ~le, mid, lo)
    return 2 * hi - 1


def _passage_walk(g, count: int, cap: int) -> tuple[np.ndarray, int]:
    """Simulate fair ±1 walks from 0 until they first hit +1, skipping ahead exactly.

    From distance d the target cannot be reached in fewer than d steps, so
    d steps are taken at once as a binomial increment. Walks still running
    after ``cap`` steps are finished with exact passage-time draws.
    """
    dist = np.ones(count, dtype=np.int64)
    steps = np.zeros(count, dtype=np.int64)
    active = np.ones(count, dtype=bool)
    while True:
        idx = np.nonzero(active & (steps < cap))[0]
        if idx.size == 0:
            break
        d = dist[idx]
        ups = g.binomial(d, 0.5)
        steps[idx] += d
        dist[idx] = d - (2 * ups - d)
        done = dist[idx] == 0
        active[idx[done]] = False
    capped = np.nonzero(active)[0]
    for i in capped:
        steps[i] += int(_passage_one(g, int(dist[i])).sum())
    return steps, int(capped.size)


def _first_passage_draw(M, m, g, n, method, cap) -> tuple[np.ndarray, int]:
    if method not in ("walk", "inverse_cdf"):
        raise DomainError("method must be 'walk' or 'inverse_cdf'")
    capped = 0
    if method == "walk":
        t, capped = _passage_walk(g, n * M, cap)
    else:
        t = _passage_one(g, n * M)
    return _scale(t.reshape(n, M).sum(axis=1), m), capped


def sample_first_passage(M: int = 1, m: int = 1, rng=None, size=None, *, method="walk", cap=10**8):
    """FirstPassage(M, m): sum of M independent passage times through +1, scaled by m."""
    FirstPassage(M, m)
    out, _ = _first_passage_draw(M, m, _gen(rng), _count(size), method, cap)
    return _shape(out, size)


# --- generic ----------------------------------------------------------------


def sample(dist: DiscreteStableDist, n: int, rng: RandomStream, **options) -> SampleBatch:
    """Draw ``n`` values of ``dist`` and wrap them with their provenance."""
    if n < 0:
        raise DomainError("sample size must be nonnegative")
    meta: dict[str, Any] = {}
    if isinstance(dist, PDS):
        vals = sample_pds(dist.gamma, dist.lam, dist.kappa, dist.m, rng, size=n)
        rep = "compound_poisson_stable_intensity"
    elif isinstance(dist, SDS):
        vals = sample_sds(dist.gamma, dist.lam, dist.kappa, dist.m, rng, size=n)
        rep = "compound_poisson_stable_intensity"
    elif isinstance(dist, DS):
        vals = sample_ds(dist.gamma, dist.beta, dist.lam, dist.q, dist.kappa, dist.m, rng, size=n)
        rep = "difference_of_compound_poisson"
    elif isinstance(dist, TPDS):
        gb = options.get("gamma_base") or default_gamma_base(dist.gamma)
        vals = sample_tpds(dist.gamma, dist.lam, dist.b, dist.m, rng, size=n, gamma_base=gb)
        rep = "compound_poisson_arccos"
        meta["gamma_base"] = gb
    elif isinstance(dist, FirstPassage):
        method = options.get("method", "walk")
        vals, capped = _first_passage_draw(dist.M, dist.m, _gen(rng), n, method, 10**8)
        rep = f"first_passage_{method}"
        meta["capped_walks"] = capped
    elif isinstance(dist, GeomPortlyStable):
        vals = sample_geom_portly_stable(dist.gamma, dist.lam, rng, size=n)
        rep = "negated_pds"
    elif isinstance(dist, Degenerate):
        vals = np.ones(n, dtype=np.int64)
        rep = "degenerate"
    else:  # pragma: no cover - all families handled above
        raise DomainError(f"no sampler for {dist.family}")
    seed = rng.seed if isinstance(rng, RandomStream) else None
    sid = rng.stream_id if isinstance(rng, RandomStream) else None
    return SampleBatch(np.asarray(vals, dtype=np.int64), dist, rep, seed, sid, meta)
