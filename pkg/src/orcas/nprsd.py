"""Duals of NPRS codes (NPRSD): shortened and repeated-column Hamming codes."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .bitmath import bit_length, gf2_nullspace
from .nprs import WeightDistribution, mersenne, nprs_generator


def _krawtchouk_row(n: int, i: int) -> list[int]:
    """``K_w(i)`` for ``w = 0..n`` by the three-term recurrence (exact)."""
    K = [0] * (n + 1)
    K[0] = 1
    if n >= 1:
        K[1] = n - 2 * i
    for w in range(1, n):
        num = (n - 2 * i) * K[w] - (n - w + 1) * K[w - 1]
        K[w + 1] = num // (w + 1)
    return K


def macwilliams_dual(weights: WeightDistribution, n: int, k: int) -> WeightDistribution:
    """Weight distribution of the dual of an ``(n, k)`` code."""
    if weights.n != n:
        raise ValueError(f"distribution has length {weights.n}, expected {n}")
    if weights.total != 1 << k:
        raise ValueError(f"distribution sums to {weights.total}, expected 2**{k}")
    acc = [0] * (n + 1)
    for i, a in enumerate(weights.counts):
        if not a:
            continue
        for w, kw in enumerate(_krawtchouk_row(n, i)):
            acc[w] += a * kw
    out = []
    for x in acc:
        q, rem = divmod(x, 1 << k)
        if rem:
            raise ValueError("input is not the weight distribution of a linear code")
        out.append(q)
    return WeightDistribution(tuple(out))


def check_high_rate(n: int, k: int) -> None:
    if not n - bit_length(n) <= k <= n or k < 0:
        raise ValueError(f"({n}, {k}) is not a high-rate NPRSD parameter pair")


@dataclass(frozen=True, eq=False)
class NprsdCode:
    """``group_map[j]`` indexes the distinct parity-check column of position ``j``."""

    n: int
    k: int
    parity_check: np.ndarray = field(repr=False)
    generator: np.ndarray = field(repr=False)
    group_map: np.ndarray = field(repr=False)
    weights: WeightDistribution = field(repr=False)
    info_positions: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.weights.min_distance

    @property
    def params(self) -> tuple[int, int, int]:
        return self.n, self.k, self.d

    @property
    def redundancy(self) -> int:
        return self.n - self.k


@lru_cache(maxsize=None)
def nprsd_weight_distribution(n: int, k: int) -> WeightDistribution:
    check_high_rate(n, k)
    if k == n:
        return WeightDistribution(tuple(comb(n, w) for w in range(n + 1)))
    return macwilliams_dual(nprs_generator(n, n - k).weights, n, n - k)


@lru_cache(maxsize=None)
def nprsd_code(n: int, k: int) -> NprsdCode:
    check_high_rate(n, k)
    if k == n:
        H = np.zeros((0, n), dtype=np.uint8)
        G = np.eye(n, dtype=np.uint8)
        groups = np.arange(n)
    else:
        base = nprs_generator(n, n - k)
        H = base.generator
        G = gf2_nullspace(H)
        groups = base.group_map
    # the nullspace basis is the identity on its free columns
    info = _identity_columns(G)
    G.setflags(write=False)
    return NprsdCode(n, k, H, G, groups, nprsd_weight_distribution(n, k), info)


def _identity_columns(G: np.ndarray) -> np.ndarray:
    cols = []
    for r in range(G.shape[0]):
        unit = np.flatnonzero((G.T == np.eye(G.shape[0], dtype=np.uint8)[r]).all(axis=1))
        cols.append(int(unit[0]))
    return np.array(cols, dtype=np.int64)


def duplicate_pairs(n: int, r: int) -> int:
    """Number of weight-2 codewords caused by repeated parity-check columns."""
    return sum(comb(int(m), 2) for m in _mults(n, r))


def _mults(n: int, r: int):
    M = mersenne(r)
    return [n // M + (1 if i > M - (n % M) else 0) for i in range(1, M + 1)]
