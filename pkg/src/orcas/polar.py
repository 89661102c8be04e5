"""DEGA polar codes with puncturing/shortening and simplified SC decoding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import ga
from .leaves import SAT, hard
from .tree import bit_update, check_update

MATCHINGS = ("none", "puncture", "shorten")
ORDERS = ("natural", "bitrev")


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def mother_length(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def bit_reverse(j, m: int):
    """Reverse the ``m``-bit binary expansion of ``j`` (scalar or array)."""
    j = np.asarray(j, dtype=np.int64)
    out = np.zeros_like(j)
    for b in range(m):
        out |= ((j >> b) & 1) << (m - 1 - b)
    return out


def removed_positions(mother_n: int, n: int, matching: str, order: str = "natural",
                      reverse_first: bool = False) -> np.ndarray:
    """Codeword positions dropped by length matching.

    Puncturing drops the first ``mother_n - n`` positions, shortening the last;
    ``bitrev`` maps that block through the bit-reversal permutation.
    ``reverse_first`` takes the block from the bit-reversed index sequence
    instead; both readings give the same set because bit reversal is an
    involution, and the flag exists only for that sensitivity check.
    """
    if matching not in MATCHINGS or order not in ORDERS:
        raise ValueError(f"unknown matching {matching!r}/{order!r}")
    r = mother_n - n
    if r == 0 or matching == "none":
        if r:
            raise ValueError("length differs from the mother length but no matching was given")
        return np.zeros(0, dtype=np.int64)
    block = np.arange(r) if matching == "puncture" else np.arange(mother_n - r, mother_n)
    if order == "natural":
        return block
    m = mother_n.bit_length() - 1
    if reverse_first:
        seq = bit_reverse(np.arange(mother_n), m)
        return np.sort(seq[block])
    return np.sort(bit_reverse(block, m))


def polar_transform(u: np.ndarray) -> np.ndarray:
    """``x = u F^{(x)m}`` over GF(2), batched along the first axis; self-inverse."""
    x = np.array(np.atleast_2d(u), dtype=np.uint8)
    B, N = x.shape
    h = 1
    while h < N:
        v = x.reshape(B, N // (2 * h), 2, h)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        h *= 2
    return x


def dega_mus(mother_n: int, mu, exact: bool = False) -> np.ndarray:
    """Bit-channel GA means for per-position channel means ``mu`` (length ``mother_n``)."""
    if not is_power_of_two(mother_n):
        raise ValueError(f"mother length {mother_n} is not a power of two")
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (mother_n,)).copy()
    if exact:
        f2 = np.vectorize(ga.f2_evolve, otypes=[float])
    else:
        f2 = ga.phi_table().f2

    def rec(m):
        if m.size == 1:
            return m
        h = m.size // 2
        a, b = m[:h], m[h:]
        return np.concatenate([rec(f2(a, b)), rec(a + b)])

    return rec(mu)


def dega_reliabilities(mother_n: int, mu, exact: bool = False) -> np.ndarray:
    """Bit-channel error probabilities ``Q(sqrt(mu_i / 2))`` in input order."""
    return ga.bit_error(dega_mus(mother_n, mu, exact))


@dataclass(frozen=True, eq=False)
class PolarSpec:
    mother_n: int
    n: int
    k: int
    frozen: np.ndarray = field(repr=False)
    matching: str = "none"
    order: str = "natural"
    removed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64), repr=False)
    design_snr_db: float | None = None

    def __post_init__(self):
        frozen = np.asarray(self.frozen, dtype=bool).copy()
        removed = np.sort(np.asarray(self.removed, dtype=np.int64))
        if frozen.shape != (self.mother_n,) or int((~frozen).sum()) != self.k:
            raise ValueError("frozen mask inconsistent with (mother_n, k)")
        if removed.size != self.mother_n - self.n:
            raise ValueError("removed set inconsistent with (mother_n, n)")
        if self.matching == "shorten" and not frozen[removed].all():
            raise ValueError("shortened positions must carry frozen inputs")
        frozen.setflags(write=False)
        removed.setflags(write=False)
        object.__setattr__(self, "frozen", frozen)
        object.__setattr__(self, "removed", removed)

    @property
    def info(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen)

    @property
    def kept(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.mother_n), self.removed)

    def channel_mu(self, es_n0: float) -> np.ndarray:
        mu = np.full(self.mother_n, 4.0 * es_n0)
        mu[self.removed] = 0.0 if self.matching == "puncture" else np.inf
        return mu

    def __eq__(self, other):
        return (isinstance(other, PolarSpec)
                and (self.mother_n, self.n, self.k, self.matching, self.order, self.design_snr_db)
                == (other.mother_n, other.n, other.k, other.matching, other.order, other.design_snr_db)
                and np.array_equal(self.frozen, other.frozen)
                and np.array_equal(self.removed, other.removed))

    __hash__ = None


def construct_polar(n: int, k: int, es_n0: float, matching: str = "none", order: str = "natural",
                    exact: bool = False, reverse_first: bool = False) -> PolarSpec:
    """DEGA polar code of length ``n`` (after matching) designed at linear ``es_n0``."""
    if not 0 <= k <= n:
        raise ValueError(f"infeasible dimension {k} for length {n}")
    N = mother_length(n)
    if matching == "none" and N != n:
        raise ValueError(f"length {n} needs puncturing or shortening")
    removed = removed_positions(N, n, matching, order, reverse_first)
    forced = np.zeros(N, dtype=bool)
    if matching == "shorten":
        forced[removed] = True
    mu = np.full(N, 4.0 * es_n0)
    mu[removed] = 0.0 if matching == "puncture" else np.inf
    p = dega_reliabilities(N, mu, exact)
    # most reliable first; equal probabilities favour the larger index
    order_idx = np.lexsort((-np.arange(N), p))
    order_idx = order_idx[~forced[order_idx]]
    frozen = np.ones(N, dtype=bool)
    frozen[order_idx[:k]] = False
    db = None if es_n0 <= 0 else 10 * math.log10(es_n0)
    return PolarSpec(N, n, k, frozen, matching, order, removed, db)


def polar_bler(spec: PolarSpec, eb_n0: float, exact: bool = False) -> float:
    """DEGA union estimate ``1 - prod(1 - p_i)`` over the information bits."""
    if spec.k == 0:
        return 0.0
    es = spec.k / spec.n * eb_n0
    p = dega_reliabilities(spec.mother_n, spec.channel_mu(es), exact)[spec.info]
    return float(-np.expm1(np.sum(np.log1p(-p))))


def polar_design_for_target(n: int, k: int, target_bler: float, matching: str = "none",
                            order: str = "natural", lo_db: float = -10.0, hi_db: float = 30.0,
                            tol_db: float = 1e-4) -> PolarSpec:
    """Bisect the design Es/N0 (dB) until the self-designed code meets ``target_bler``."""
    def obj(db):
        es = 10 ** (db / 10)
        spec = construct_polar(n, k, es, matching, order)
        return polar_bler(spec, es * n / k), spec

    best = obj(hi_db)[1]
    while hi_db - lo_db > tol_db:
        mid = 0.5 * (lo_db + hi_db)
        p, spec = obj(mid)
        if p > target_bler:
            lo_db = mid
        else:
            hi_db, best = mid, spec
    return best


def polar_encode(spec: PolarSpec, message) -> np.ndarray:
    m = np.asarray(message, dtype=np.uint8)
    single = m.ndim == 1
    m = np.atleast_2d(m)
    if m.shape[1] != spec.k:
        raise ValueError(f"message length {m.shape[1]} does not match k = {spec.k}")
    u = np.zeros((m.shape[0], spec.mother_n), dtype=np.uint8)
    u[:, spec.info] = m
    x = polar_transform(u)[:, spec.kept]
    return x[0] if single else x


def _mother_llr(spec: PolarSpec, llr: np.ndarray, sat: float) -> np.ndarray:
    x = np.clip(np.atleast_2d(np.asarray(llr, dtype=float)), -sat, sat)
    if x.shape[1] != spec.n:
        raise ValueError(f"expected {spec.n} LLRs, got {x.shape[1]}")
    full = np.zeros((x.shape[0], spec.mother_n))
    full[:, spec.kept] = x
    if spec.matching == "shorten":
        full[:, spec.removed] = sat
    return full


@lru_cache(maxsize=256)
def _node_plan(frozen_bytes: bytes):
    """Nested plan: 'r0', 'r1' or (left, right) over the frozen mask."""
    fr = np.frombuffer(frozen_bytes, dtype=bool)
    if fr.all():
        return "r0"
    if not fr.any():
        return "r1"
    h = fr.size // 2
    return (_node_plan(fr[:h].tobytes()), _node_plan(fr[h:].tobytes()))


def polar_sc_decode(spec: PolarSpec, llr, sat: float = SAT):
    """Simplified SC (rate-0/rate-1 shortcuts); returns ``(message, codeword)``."""
    single = np.asarray(llr).ndim == 1
    x = _mother_llr(spec, llr, sat)
    u, c = _ssc(_node_plan(spec.frozen.tobytes()), x)
    msg, cw = u[:, spec.info], c[:, spec.kept]
    return (msg[0], cw[0]) if single else (msg, cw)


def _ssc(plan, x):
    B, n = x.shape
    if plan == "r0":
        z = np.zeros((B, n), dtype=np.uint8)
        return z, z
    if plan == "r1":
        c = hard(x)
        return polar_transform(c), c
    h = n // 2
    l1, l2 = x[:, :h], x[:, h:]
    if plan[0] == "r0":
        ua = np.zeros((B, h), dtype=np.uint8)
        ca = ua
        lv = l1 + l2
    else:
        ua, ca = _ssc(plan[0], check_update(l1, l2))
        lv = bit_update(l1, l2, ca)
    ub, cb = _ssc(plan[1], lv)
    return np.concatenate([ua, ub], axis=1), np.concatenate([ca ^ cb, cb], axis=1)


def polar_sc_decode_plain(spec: PolarSpec, llr, sat: float = SAT):
    """Bit-by-bit SC reference decoder (no node shortcuts)."""
    single = np.asarray(llr).ndim == 1
    x = _mother_llr(spec, llr, sat)
    u, c = _sc_plain(spec.frozen, x)
    msg, cw = u[:, spec.info], c[:, spec.kept]
    return (msg[0], cw[0]) if single else (msg, cw)


def _sc_plain(frozen, x):
    B, n = x.shape
    if n == 1:
        u = np.zeros((B, 1), np.uint8) if frozen[0] else hard(x)
        return u, u
    h = n // 2
    l1, l2 = x[:, :h], x[:, h:]
    ua, ca = _sc_plain(frozen[:h], check_update(l1, l2))
    ub, cb = _sc_plain(frozen[h:], bit_update(l1, l2, ca))
    return np.concatenate([ua, ub], axis=1), np.concatenate([ca ^ cb, cb], axis=1)
