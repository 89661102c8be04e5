"""Soft-decision decoders for the leaf codes of an ORCAS tree.

Every decoder takes LLRs of shape ``(n,)`` or ``(batch, n)`` (positive values
favour bit 0) and returns a :class:`LeafDecodeResult` with the same leading
shape.  Decoders work on whole batches so Monte Carlo runs stay in numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from scipy.linalg import hadamard

from .bitmath import all_messages
from .nprs import NprsCode
from .nprsd import NprsdCode

SAT = 1e6


@dataclass
class LeafDecodeResult:
    codeword: np.ndarray
    message: np.ndarray


def boxplus_exact(a, b):
    """ln((1 + e^(a+b)) / (e^a + e^b)), evaluated without overflow."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )
    return out if out.ndim else float(out)


def boxplus_min(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    return out if out.ndim else float(out)


def hard(llr: np.ndarray) -> np.ndarray:
    return (llr < 0).astype(np.uint8)


@lru_cache(maxsize=None)
def _group_layout(group_bytes: bytes, n_groups: int) -> np.ndarray:
    """Padded index matrix ``(n_groups, max_size)``; padding points past the end."""
    group_map = np.frombuffer(group_bytes, dtype=np.int64)
    n = group_map.size
    sizes = np.bincount(group_map, minlength=n_groups)
    width = max(int(sizes.max(initial=0)), 1)
    layout = np.full((n_groups, width), n, dtype=np.int64)
    fill = np.zeros(n_groups, dtype=np.int64)
    for pos, g in enumerate(group_map):
        layout[g, fill[g]] = pos
        fill[g] += 1
    layout.setflags(write=False)
    return layout


def group_layout(group_map, n_groups: int | None = None) -> np.ndarray:
    group_map = np.ascontiguousarray(group_map, dtype=np.int64)
    if n_groups is None:
        n_groups = int(group_map.max()) + 1
    return _group_layout(group_map.tobytes(), n_groups)


def _as_batch(llr) -> tuple[np.ndarray, bool]:
    llr = np.asarray(llr, dtype=float)
    return (llr[None, :], True) if llr.ndim == 1 else (llr, False)


def _pack(codeword: np.ndarray, message: np.ndarray, single: bool) -> LeafDecodeResult:
    if single:
        return LeafDecodeResult(codeword[0], message[0])
    return LeafDecodeResult(codeword, message)


@lru_cache(maxsize=None)
def _indicator(group_bytes: bytes, n_groups: int) -> np.ndarray:
    group_map = np.frombuffer(group_bytes, dtype=np.int64)
    A = np.zeros((group_map.size, n_groups))
    A[np.arange(group_map.size), group_map] = 1.0
    A.setflags(write=False)
    return A


def group_sum_llr(llr, group_map, n_groups: int | None = None) -> np.ndarray:
    """Sum the LLRs of each group (repetitions of one simplex bit)."""
    x, single = _as_batch(llr)
    group_map = np.ascontiguousarray(group_map, dtype=np.int64)
    if n_groups is None:
        n_groups = int(group_map.max()) + 1
    out = x @ _indicator(group_map.tobytes(), n_groups)
    return out[0] if single else out


def _group_min(x: np.ndarray, layout: np.ndarray):
    """Per-group parity of hard decisions, smallest |LLR| and its raw position."""
    B = x.shape[0]
    mag = np.concatenate([np.abs(x), np.full((B, 1), np.inf)], axis=1)[:, layout]
    bits = np.concatenate([hard(x), np.zeros((B, 1), np.uint8)], axis=1)[:, layout]
    slot = mag.argmin(axis=2)
    weakest = layout[np.arange(layout.shape[0])[None, :], slot]
    return np.bitwise_xor.reduce(bits, axis=2), np.take_along_axis(mag, slot[..., None], 2)[..., 0], weakest


def group_boxplus_llr(llr, group_map, n_groups: int | None = None) -> np.ndarray:
    """Min-sum check combination of each group; empty groups come out as +SAT."""
    x, single = _as_batch(llr)
    layout = group_layout(group_map, n_groups)
    parity, mag, _ = _group_min(x, layout)
    out = np.where(parity == 1, -1.0, 1.0) * np.minimum(mag, SAT)
    return out[0] if single else out


def fht_butterfly(x: np.ndarray) -> np.ndarray:
    """Radix-2 Walsh-Hadamard transform along the last axis (reference form)."""
    y = np.array(x, dtype=float, copy=True)
    B, N = y.shape
    tmp = np.empty_like(y)
    h = 1
    while h < N:
        a = y.reshape(B, N // (2 * h), 2, h)
        o = tmp.reshape(B, N // (2 * h), 2, h)
        np.add(a[:, :, 0], a[:, :, 1], out=o[:, :, 0])
        np.subtract(a[:, :, 0], a[:, :, 1], out=o[:, :, 1])
        y, tmp = tmp, y
        h *= 2
    return y


@lru_cache(maxsize=None)
def _hadamard(bits: int) -> np.ndarray:
    H = hadamard(1 << bits).astype(float)
    H.setflags(write=False)
    return H


def fht(x: np.ndarray, radix_bits: int = 4) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis (length 2^k).

    Uses radix-``2**radix_bits`` stages: each stage is a small dense
    Hadamard product on one digit, then the digits are rotated.
    """
    y = np.asarray(x, dtype=float)
    B, N = y.shape
    k = N.bit_length() - 1
    digits = [radix_bits] * (k // radix_bits) + ([k % radix_bits] if k % radix_bits else [])
    for bits in digits:
        w = 1 << bits
        y = y.reshape(B, N // w, w) @ _hadamard(bits)
        y = np.ascontiguousarray(y.transpose(0, 2, 1)).reshape(B, N)
    return y if digits else y.copy()


def _messages_to_codeword(msg_idx: np.ndarray, code: NprsCode) -> tuple[np.ndarray, np.ndarray]:
    k = code.k
    message = ((msg_idx[:, None] >> np.arange(k)[None, :]) & 1).astype(np.uint8)
    cols = np.arange(1, code.M + 1)
    group_bits = np.bitwise_count(msg_idx[:, None] & cols[None, :]) & 1
    return group_bits[:, code.group_map].astype(np.uint8), message


def decode_nprs_fht(llr, code: NprsCode) -> LeafDecodeResult:
    """ML decoding of an NPRS code by a fast Hadamard transform."""
    x, single = _as_batch(llr)
    if x.shape[1] != code.n:
        raise ValueError(f"expected {code.n} LLRs, got {x.shape[1]}")
    totals = group_sum_llr(x, code.group_map, code.M)
    spectrum = np.zeros((x.shape[0], 1 << code.k))
    spectrum[:, 1:] = totals
    corr = fht(spectrum)
    best = corr.argmax(axis=1)
    cw, msg = _messages_to_codeword(best, code)
    return _pack(cw, msg, single)


def decode_cw(llr, code: NprsCode) -> LeafDecodeResult:
    """Cordaro-Wagner (k = 2) decoding: fix odd parity at the weakest total."""
    if code.k != 2:
        raise ValueError("Cordaro-Wagner decoding needs k = 2")
    x, single = _as_batch(llr)
    totals = group_sum_llr(x, code.group_map, 3)
    bits = hard(totals)
    odd = (bits[:, 0] ^ bits[:, 1] ^ bits[:, 2]).astype(bool)
    weakest = np.abs(totals).argmin(axis=1)
    bits[odd, weakest[odd]] ^= 1
    return _pack(bits[:, code.group_map], bits[:, :2].copy(), single)


def decode_repetition(llr) -> LeafDecodeResult:
    x, single = _as_batch(llr)
    bit = (x.sum(axis=1) < 0).astype(np.uint8)
    cw = np.repeat(bit[:, None], x.shape[1], axis=1)
    return _pack(cw, bit[:, None], single)


def decode_rate0(llr) -> LeafDecodeResult:
    x, single = _as_batch(llr)
    return _pack(np.zeros(x.shape, np.uint8), np.zeros((x.shape[0], 0), np.uint8), single)


def decode_rate1(llr) -> LeafDecodeResult:
    x, single = _as_batch(llr)
    cw = hard(x)
    return _pack(cw, cw.copy(), single)


def _spc_codeword(x: np.ndarray) -> np.ndarray:
    cw = hard(x)
    odd = (np.bitwise_xor.reduce(cw, axis=1) == 1)
    weakest = np.abs(x).argmin(axis=1)
    cw[odd, weakest[odd]] ^= 1
    return cw


def decode_spc(llr, code: NprsdCode | None = None) -> LeafDecodeResult:
    """Single parity check: flip the least reliable bit if the parity is odd."""
    x, single = _as_batch(llr)
    cw = _spc_codeword(x)
    info = code.info_positions if code is not None else np.arange(1, x.shape[1])
    return _pack(cw, cw[:, info], single)


def _fix_groups(x: np.ndarray, parity: np.ndarray, weakest: np.ndarray, decided: np.ndarray) -> np.ndarray:
    """Flip the weakest raw bit of every group whose parity disagrees with ``decided``."""
    cw = hard(x)
    rows, groups = np.nonzero(parity != decided)
    cw[rows, weakest[rows, groups]] ^= 1
    return cw


def decode_dual_cw(llr, code: NprsdCode) -> LeafDecodeResult:
    """NPRSD decoding for k = n - 2, where the inner Hamming code is a length-3 repetition."""
    if code.redundancy != 2:
        raise ValueError("dual Cordaro-Wagner decoding needs k = n - 2")
    x, single = _as_batch(llr)
    layout = group_layout(code.group_map, 3)
    parity, mag, weakest = _group_min(x, layout)
    eff = np.where(parity == 1, -1.0, 1.0) * mag
    decided = (eff.sum(axis=1) < 0).astype(np.uint8)
    cw = _fix_groups(x, parity, weakest, np.repeat(decided[:, None], 3, axis=1))
    return _pack(cw, cw[:, code.info_positions], single)


@dataclass(frozen=True)
class _HammingTables:
    present: np.ndarray  # group index of every present effective position
    labels: np.ndarray  # syndrome (column value) of every present effective position
    lookup: np.ndarray  # syndrome -> effective position; len(present) for 0, len(present) + 1 if absent
    p: int


@lru_cache(maxsize=None)
def _hamming_tables(n: int, k: int) -> _HammingTables:
    from .nprsd import nprsd_code

    code = nprsd_code(n, k)
    r = code.redundancy
    M = (1 << r) - 1
    sizes = np.bincount(code.group_map, minlength=M)
    present = np.flatnonzero(sizes)
    labels = present + 1
    lookup = np.full(M + 1, present.size + 1, dtype=np.int64)
    lookup[labels] = np.arange(present.size)
    lookup[0] = present.size
    p = min(r, present.size)
    return _HammingTables(present, labels, lookup, p)


def decode_nprsd_chase(llr, code: NprsdCode) -> LeafDecodeResult:
    """Chase-II decoding of the effective Hamming code, then per-group repair.

    The ``n - k`` least reliable effective positions are flipped in every
    pattern; each resulting word is syndrome-decoded and the candidate with
    the smallest discrepancy sum |LLR| against the hard decision wins.
    """
    x, single = _as_batch(llr)
    if x.shape[1] != code.n:
        raise ValueError(f"expected {code.n} LLRs, got {x.shape[1]}")
    tabs = _hamming_tables(code.n, code.k)
    M = (1 << code.redundancy) - 1
    layout = group_layout(code.group_map, M)[tabs.present]
    parity, mag, weakest = _group_min(x, layout)
    B, G = parity.shape

    s0 = np.bitwise_xor.reduce(parity.astype(np.int64) * tabs.labels[None, :], axis=1)
    p = tabs.p
    if p < G:
        order = np.argpartition(mag, p - 1, axis=1)[:, :p]
    else:
        order = np.broadcast_to(np.arange(G), (B, G))
    sel_mag = np.take_along_axis(mag, order, axis=1)
    sel_lab = tabs.labels[order]

    # pattern t flips selected position j iff bit j of t is set
    syn = s0[:, None]
    cost = np.zeros((B, 1))
    for j in range(p):
        syn = np.concatenate([syn, syn ^ sel_lab[:, j : j + 1]], axis=1)
        cost = np.concatenate([cost, cost + sel_mag[:, j : j + 1]], axis=1)
    rows = np.arange(B)
    # columns G and G + 1 stand for "syndrome zero" and "uncorrectable"
    pos = tabs.lookup[syn]
    mag_ext = np.concatenate([mag, np.zeros((B, 1)), np.full((B, 1), np.inf)], axis=1)
    # a correction landing inside the pattern reproduces a cheaper pattern
    # with zero syndrome, so adding its magnitude never changes the argmin
    cost += np.take_along_axis(mag_ext, pos, axis=1)
    best = cost.argmin(axis=1)

    flips = np.zeros((B, G + 1), dtype=np.uint8)
    for j in range(p):
        hit = ((best >> j) & 1).astype(bool)
        flips[rows[hit], order[hit, j]] ^= 1
    best_pos = pos[rows, best]
    ok = best_pos <= G
    flips[rows[ok], best_pos[ok]] ^= 1
    stuck = np.flatnonzero(~ok)
    if stuck.size:
        _resolve_by_pairs(flips, stuck, s0, mag, tabs)
    decided = parity ^ flips[:, :G]
    cw = _fix_groups(x, parity, weakest, decided)
    return _pack(cw, cw[:, code.info_positions], single)


def _resolve_by_pairs(flips, rows, s0, mag, tabs: _HammingTables) -> None:
    """Fallback when no test pattern leaves a correctable syndrome.

    Two present columns always reach any syndrome here, so the cheapest such
    pair is flipped on top of the hard decision.
    """
    G = tabs.present.size
    for b in rows:
        flips[b] = 0
        s = int(s0[b])
        partner = tabs.lookup[tabs.labels ^ s]
        valid = partner < G
        cand = np.flatnonzero(valid)
        costs = mag[b, cand] + mag[b, partner[cand]]
        i = cand[costs.argmin()]
        flips[b, i] ^= 1
        flips[b, partner[i]] ^= 1


def brute_force_ml(llr, generator: np.ndarray) -> LeafDecodeResult:
    """Exhaustive correlation decoder over all ``2^k`` codewords (test oracle)."""
    x, single = _as_batch(llr)
    k = generator.shape[0]
    msgs = all_messages(k)
    words = (msgs.astype(np.int64) @ generator.astype(np.int64) & 1).astype(np.uint8)
    signs = 1.0 - 2.0 * words.T
    step = max(1, (1 << 22) // words.shape[0])
    best = np.concatenate([(x[i : i + step] @ signs).argmax(axis=1) for i in range(0, x.shape[0], step)])
    return _pack(words[best], msgs[best], single)


def correlation(llr, codeword) -> np.ndarray:
    return np.sum(np.asarray(llr) * (1.0 - 2.0 * np.asarray(codeword, dtype=float)), axis=-1)
