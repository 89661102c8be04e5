"""GF(2) helpers on dense numpy arrays.

Bit vectors and matrices are plain ``uint8`` arrays holding 0/1 entries.
Binary expansions are LSB-first throughout the package.
"""

from __future__ import annotations

import numpy as np


def binary_expansion(i: int, m: int) -> np.ndarray:
    """Return the ``m``-bit LSB-first expansion of ``i``."""
    if i < 0 or i >= 1 << m:
        raise ValueError(f"{i} does not fit into {m} bits")
    return np.array([(i >> j) & 1 for j in range(m)], dtype=np.uint8)


def bit_length(i: int) -> int:
    """Number of bits needed for ``i``, i.e. ceil(log2(i + 1))."""
    if i < 0:
        raise ValueError("bit_length is defined for non-negative integers")
    return int(i).bit_length()


def expansion_matrix(m: int, n: int) -> np.ndarray:
    """``m x n`` matrix whose column ``j`` (1-indexed) is the expansion of ``j``."""
    if n > (1 << m) - 1:
        raise ValueError(f"cannot expand {n} distinct non-zero integers with {m} bits")
    cols = np.arange(1, n + 1)
    return ((cols[None, :] >> np.arange(m)[:, None]) & 1).astype(np.uint8)


def hamming_weight(v) -> int:
    return int(np.count_nonzero(np.asarray(v)))


def gf2_matvec(M, v) -> np.ndarray:
    """Return ``M v^T`` over GF(2)."""
    M = np.asarray(M, dtype=np.uint8)
    v = np.asarray(v, dtype=np.uint8)
    if M.shape[1] != v.shape[-1]:
        raise ValueError(f"shape mismatch: {M.shape} times {v.shape}")
    return (M.astype(np.int64) @ v.astype(np.int64) & 1).astype(np.uint8)


def gf2_matmul(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[-1] != B.shape[0]:
        raise ValueError(f"shape mismatch: {A.shape} times {B.shape}")
    return (A @ B & 1).astype(np.uint8)


def _rref(M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    A = (np.asarray(M, dtype=np.uint8) & 1).copy()
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            A[[r, p]] = A[[p, r]]
        hit = np.nonzero(A[:, c])[0]
        hit = hit[hit != r]
        A[hit] ^= A[r]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def gf2_rank(M) -> int:
    return len(_rref(M)[1])


def gf2_nullspace(M) -> np.ndarray:
    """Basis (as rows) of ``{x : M x^T = 0}``, in reduced form.

    Each basis vector has exactly one free coordinate set, so the returned
    matrix is systematic on the free columns and has full row rank.
    """
    M = np.asarray(M, dtype=np.uint8)
    n = M.shape[1]
    R, pivots = _rref(M)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for row, f in enumerate(free):
        basis[row, f] = 1
        for i, p in enumerate(pivots):
            basis[row, p] = R[i, f]
    return basis


def all_messages(k: int) -> np.ndarray:
    """All ``2**k`` binary messages as rows, message ``i`` being the LSB-first expansion of ``i``."""
    idx = np.arange(1 << k)
    return ((idx[:, None] >> np.arange(k)[None, :]) & 1).astype(np.uint8)


def codewords(G) -> np.ndarray:
    """Enumerate every codeword generated by the rows of ``G``."""
    G = np.asarray(G, dtype=np.uint8)
    return gf2_matmul(all_messages(G.shape[0]), G)


def weight_histogram(words: np.ndarray, n: int) -> np.ndarray:
    """Histogram of Hamming weights of the rows of ``words``, length ``n + 1``."""
    w = np.count_nonzero(words, axis=1)
    return np.bincount(w, minlength=n + 1).astype(np.int64)
