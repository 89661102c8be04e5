"""ORCAS code trees: rate profile -> recursive Plotkin code, encoder and SC decoder."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import leaves
from .bitmath import bit_length
from .nprs import NprsCode, nprs_generator
from .nprsd import NprsdCode, nprsd_code

BASE_LENGTHS = frozenset({1, 2, 3, 5, 7, 9})


def supported_length(n: int) -> bool:
    """True for ``n = o * 2**m`` with ``o`` in {1, 3, 5, 7, 9}."""
    if n < 1:
        return False
    while n % 2 == 0 and n > 2:
        n //= 2
    return n in BASE_LENGTHS


class MalformedProfile(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RateProfile:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8).copy()
        if bits.ndim != 1 or not np.isin(bits, (0, 1)).all():
            raise MalformedProfile("rate profile must be a 0/1 vector")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def n(self) -> int:
        return int(self.bits.size)

    @property
    def k(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, RateProfile) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def halves(self) -> tuple["RateProfile", "RateProfile"]:
        h = self.n // 2
        return RateProfile(self.bits[:h]), RateProfile(self.bits[h:])

    @classmethod
    def from_string(cls, s: str) -> "RateProfile":
        return cls(np.array([int(ch) for ch in s.strip()], dtype=np.uint8))

    def to_string(self) -> str:
        return "".join(str(int(b)) for b in self.bits)


@dataclass(frozen=True, eq=False)
class Rate0:
    n: int
    k: int = 0

    @property
    def d(self) -> float:
        return float("inf")


@dataclass(frozen=True, eq=False)
class NprsLeaf:
    code: NprsCode = field(repr=False)

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def k(self) -> int:
        return self.code.k

    @property
    def d(self) -> int:
        return self.code.d


@dataclass(frozen=True, eq=False)
class NprsdLeaf:
    code: NprsdCode = field(repr=False)

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def k(self) -> int:
        return self.code.k

    @property
    def d(self) -> int:
        return self.code.d


@dataclass(frozen=True, eq=False)
class Split:
    left: "CodeTree"
    right: "CodeTree"

    @property
    def n(self) -> int:
        return 2 * self.left.n

    @property
    def k(self) -> int:
        return self.left.k + self.right.k

    @property
    def d(self) -> float:
        return min(self.left.d, 2 * self.right.d)


CodeTree = Union[Rate0, NprsLeaf, NprsdLeaf, Split]


def leaf_kind(n: int, k: int) -> str | None:
    """Which leaf code covers ``(n, k)``: 'rate0', 'nprs', 'nprsd' or None (must split)."""
    if k == 0:
        return "rate0"
    if k <= bit_length(n):
        return "nprs"
    if k >= n - bit_length(n):
        return "nprsd"
    return None


def make_leaf(n: int, k: int) -> CodeTree:
    kind = leaf_kind(n, k)
    if kind == "rate0":
        return Rate0(n)
    if kind == "nprs":
        return NprsLeaf(nprs_generator(n, k))
    if kind == "nprsd":
        return NprsdLeaf(nprsd_code(n, k))
    raise ValueError(f"({n}, {k}) has no leaf code")


def build_tree(profile: RateProfile) -> CodeTree:
    n, k = profile.n, profile.k
    if leaf_kind(n, k) is not None:
        return make_leaf(n, k)
    if n % 2:
        raise MalformedProfile(f"profile needs a split at odd length {n} (k = {k})")
    left, right = profile.halves()
    return Split(build_tree(left), build_tree(right))


def leaves_in_order(tree: CodeTree) -> list[CodeTree]:
    if isinstance(tree, Split):
        return leaves_in_order(tree.left) + leaves_in_order(tree.right)
    return [tree]


def describe(tree: CodeTree, indent: int = 0) -> list[str]:
    """Indented ``(n,k,d)`` lines, parents before children."""
    pad = "  " * indent
    d = tree.d
    d_txt = "-" if d == float("inf") else str(int(d))
    if isinstance(tree, Split):
        lines = [f"{pad}({tree.n},{tree.k},{d_txt}) plotkin"]
        return lines + describe(tree.left, indent + 1) + describe(tree.right, indent + 1)
    label = {Rate0: "rate-0", NprsLeaf: "NPRS", NprsdLeaf: "NPRSD"}[type(tree)]
    return [f"{pad}({tree.n},{tree.k},{d_txt}) {label} [{decoder_name(tree)}]"]


def decoder_name(leaf: CodeTree) -> str:
    if isinstance(leaf, Rate0):
        return "frozen"
    n, k = leaf.n, leaf.k
    if isinstance(leaf, NprsLeaf):
        return {1: "repetition", 2: "CW"}.get(k, "FHT")
    if k == n:
        return "rate-1"
    if k == n - 1:
        return "SPC"
    if k == n - 2:
        return "CW dual"
    return "Chase-II"


def encode(tree: CodeTree, message) -> np.ndarray:
    """Plotkin encoding ``(u xor v | v)``; message bits are consumed left subtree first."""
    m = np.asarray(message, dtype=np.uint8)
    single = m.ndim == 1
    m = np.atleast_2d(m)
    if m.shape[1] != tree.k:
        raise ValueError(f"message length {m.shape[1]} does not match k = {tree.k}")
    cw = _encode(tree, m)
    return cw[0] if single else cw


def _encode(tree: CodeTree, m: np.ndarray) -> np.ndarray:
    if isinstance(tree, Split):
        u = _encode(tree.left, m[:, : tree.left.k])
        v = _encode(tree.right, m[:, tree.left.k :])
        return np.concatenate([u ^ v, v], axis=1)
    if isinstance(tree, Rate0):
        return np.zeros((m.shape[0], tree.n), np.uint8)
    G = tree.code.generator
    return (m.astype(np.int64) @ G.astype(np.int64) & 1).astype(np.uint8)


def decode_leaf(leaf: CodeTree, llr: np.ndarray, fht_for_cw: bool = False) -> leaves.LeafDecodeResult:
    if isinstance(leaf, Rate0):
        return leaves.decode_rate0(llr)
    n, k = leaf.n, leaf.k
    if isinstance(leaf, NprsLeaf):
        if k == 1:
            return leaves.decode_repetition(llr)
        if k == 2 and not fht_for_cw:
            return leaves.decode_cw(llr, leaf.code)
        return leaves.decode_nprs_fht(llr, leaf.code)
    if k == n:
        return leaves.decode_rate1(llr)
    if k == n - 1:
        return leaves.decode_spc(llr, leaf.code)
    if k == n - 2:
        return leaves.decode_dual_cw(llr, leaf.code)
    return leaves.decode_nprsd_chase(llr, leaf.code)


def check_update(l1: np.ndarray, l2: np.ndarray, exact: bool = False) -> np.ndarray:
    """LLR of the ``u`` branch: l1 boxplus l2 (min-sum unless ``exact``)."""
    if exact:
        return leaves.boxplus_exact(l1, l2)
    return np.copysign(np.minimum(np.abs(l1), np.abs(l2)), l1 * l2)


def bit_update(l1: np.ndarray, l2: np.ndarray, u_hat: np.ndarray) -> np.ndarray:
    """LLR of the ``v`` branch: (-1)^u l1 + l2."""
    return np.where(u_hat == 1, -l1, l1) + l2


def sc_decode(tree: CodeTree, llr, exact_boxplus: bool = False, sat: float = leaves.SAT):
    """Successive cancellation decoding; returns ``(message, codeword)``."""
    x = np.asarray(llr, dtype=float)
    single = x.ndim == 1
    x = np.clip(np.atleast_2d(x), -sat, sat)
    if x.shape[1] != tree.n:
        raise ValueError(f"expected {tree.n} LLRs, got {x.shape[1]}")
    msg, cw = _sc(tree, x, exact_boxplus)
    return (msg[0], cw[0]) if single else (msg, cw)


def _sc(tree: CodeTree, x: np.ndarray, exact: bool):
    if not isinstance(tree, Split):
        r = decode_leaf(tree, x)
        return r.message, r.codeword
    h = tree.n // 2
    l1, l2 = x[:, :h], x[:, h:]
    if isinstance(tree.left, Rate0):
        mu = np.zeros((x.shape[0], 0), np.uint8)
        cu = np.zeros((x.shape[0], h), np.uint8)
        lv = l1 + l2
    else:
        mu, cu = _sc(tree.left, check_update(l1, l2, exact), exact)
        lv = bit_update(l1, l2, cu)
    mv, cv = _sc(tree.right, lv, exact)
    return np.concatenate([mu, mv], axis=1), np.concatenate([cu ^ cv, cv], axis=1)


def sc_decode_genie(tree: CodeTree, llr, codeword, exact_boxplus: bool = False, sat: float = leaves.SAT):
    """SC decoding where every ``v`` branch sees the true ``u``.

    Returns a list of ``(leaf, errors)`` in decoding order, ``errors`` being a
    boolean per frame telling whether that leaf decoded wrongly.
    """
    x = np.clip(np.atleast_2d(np.asarray(llr, dtype=float)), -sat, sat)
    c = np.atleast_2d(np.asarray(codeword, dtype=np.uint8))
    out: list = []
    _genie(tree, x, c, exact_boxplus, out)
    return out


def _genie(tree, x, c, exact, out):
    if not isinstance(tree, Split):
        r = decode_leaf(tree, x)
        out.append((tree, (r.codeword != c).any(axis=1)))
        return
    h = tree.n // 2
    l1, l2 = x[:, :h], x[:, h:]
    v = c[:, h:]
    u = c[:, :h] ^ v
    _genie(tree.left, check_update(l1, l2, exact), u, exact, out)
    _genie(tree.right, bit_update(l1, l2, u), v, exact, out)


def genie_bound(tree: CodeTree, leaf_rates: list[float]) -> float:
    """Combine per-leaf error rates (decoding order) by p1 + p2 - p1 p2 at each split."""
    it = iter(leaf_rates)

    def walk(node):
        if isinstance(node, Split):
            p1, p2 = walk(node.left), walk(node.right)
            return p1 + p2 - p1 * p2
        return next(it)

    return walk(tree)
