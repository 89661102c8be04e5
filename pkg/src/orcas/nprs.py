"""Naturally punctured repeated simplex (NPRS) codes.

An ``(n, k)`` NPRS code repeats the simplex code of dimension ``k`` often
enough to reach length ``n`` and then drops the first ``(-n) mod (2**k - 1)``
positions.  Its sorted generator lists every non-zero ``k``-bit column in
ascending order, each column repeated ``column_multiplicity`` times.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .bitmath import bit_length, expansion_matrix


def mersenne(k: int) -> int:
    return (1 << k) - 1


@dataclass(frozen=True)
class WeightDistribution:
    """Codeword counts ``A_0 .. A_n`` (exact Python integers)."""

    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.counts) - 1

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def min_distance(self) -> int:
        """Smallest non-zero weight; ``n + 1`` stands in for "no non-zero codeword"."""
        for w, a in enumerate(self.counts):
            if w > 0 and a:
                return w
        return self.n + 1

    def __getitem__(self, w: int) -> int:
        return self.counts[w]

    def __len__(self) -> int:
        return len(self.counts)

    def nonzero(self) -> dict[int, int]:
        return {w: a for w, a in enumerate(self.counts) if a}

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=object)

    @classmethod
    def from_counts(cls, counts) -> "WeightDistribution":
        return cls(tuple(int(c) for c in counts))


def puncture_count(n: int, k: int) -> int:
    if k < 1:
        raise ValueError("NPRS codes need k >= 1")
    return (-n) % mersenne(k)


def column_multiplicity(n: int, k: int, i: int) -> int:
    """How often column ``i`` (1-indexed) of the simplex generator is repeated."""
    M = mersenne(k)
    if not 1 <= i <= M:
        raise ValueError(f"column index {i} outside [1, {M}]")
    return n // M + (1 if i > M - (n % M) else 0)


def multiplicities(n: int, k: int) -> np.ndarray:
    M = mersenne(k)
    i = np.arange(1, M + 1)
    return n // M + (i > M - (n % M)).astype(np.int64)


@dataclass(frozen=True, eq=False)
class NprsCode:
    n: int
    k: int
    generator: np.ndarray = field(repr=False)
    group_map: np.ndarray = field(repr=False)
    weights: WeightDistribution = field(repr=False)

    @property
    def M(self) -> int:
        return mersenne(self.k)

    @property
    def r(self) -> int:
        return -(-self.n // self.M)

    @property
    def a(self) -> int:
        return puncture_count(self.n, self.k)

    @property
    def d(self) -> int:
        return self.weights.min_distance

    @property
    def params(self) -> tuple[int, int, int]:
        return self.n, self.k, self.d


def check_low_rate(n: int, k: int) -> None:
    if not 1 <= k <= bit_length(n):
        raise ValueError(f"({n}, {k}) is not a low-rate NPRS parameter pair")


@lru_cache(maxsize=None)
def nprs_generator(n: int, k: int) -> NprsCode:
    """Build the sorted generator of the ``(n, k)`` NPRS code.

    ``group_map[j]`` is the 0-based simplex column that position ``j`` repeats.
    """
    check_low_rate(n, k)
    mult = multiplicities(n, k)
    group_map = np.repeat(np.arange(mersenne(k)), mult)
    G = expansion_matrix(k, mersenne(k))[:, group_map]
    G.setflags(write=False)
    group_map.setflags(write=False)
    return NprsCode(n, k, G, group_map, nprs_weight_distribution(n, k))


def _v(i: int, j: int) -> int:
    return (j >> (i + 1)) * (1 << i) + max(0, (j % (1 << (i + 1))) - (1 << i))


def coset_weight_values(i: int, j: int) -> set[int]:
    """Weights taken by the anticode codewords whose lowest message bit is ``i``.

    ``j`` counts the integers ``0 .. a`` of the removed expansion columns,
    i.e. ``j = a + 1``.
    """
    v = _v(i, j)
    if (1 << (i + 1)) <= j:
        return {v, j - v}
    return {v}


def anticode_coset_distribution(k: int, a: int, i: int) -> dict[int, int]:
    """Weight counts of coset ``i`` of the anticode spanned by ``B_{k,a}``."""
    if not 0 <= i < k:
        raise ValueError(f"coset index {i} outside [0, {k})")
    if not 0 <= a < mersenne(k):
        raise ValueError(f"puncture count {a} outside [0, {mersenne(k)})")
    W = coset_weight_values(i, a + 1)
    return {w: 1 << (k - i - len(W)) for w in W}


@lru_cache(maxsize=None)
def nprs_weight_distribution(n: int, k: int) -> WeightDistribution:
    check_low_rate(n, k)
    d = -(-n // mersenne(k)) << (k - 1)
    a = puncture_count(n, k)
    counts = [0] * (n + 1)
    counts[0] = 1
    for i in range(k):
        for w, count in anticode_coset_distribution(k, a, i).items():
            counts[d - w] += count
    return WeightDistribution(tuple(counts))


def distance_optimal_dims(n: int) -> set[int]:
    """Dimensions ``k <= bit_length(n)`` for which the NPRS code is guaranteed distance-optimal.

    A dimension qualifies when its puncture count ``a`` lies in
    ``{0} | [2**j - j, 2**j]`` with ``j = bit_length(a - 1)``; ``k = 1`` always does.
    """
    if n < 1:
        raise ValueError("n must be positive")
    dims = {1}
    for k in range(2, bit_length(n) + 1):
        a = puncture_count(n, k)
        if a == 0:
            dims.add(k)
            continue
        j = bit_length(a - 1)
        if (1 << j) - j <= a <= 1 << j:
            dims.add(k)
    return dims
