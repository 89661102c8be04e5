"""DEGA-based ORCAS construction and analytic BLER evaluation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import ga
from .bitmath import bit_length
from .tree import MalformedProfile, RateProfile, leaf_kind, supported_length

log = logging.getLogger(__name__)


class SearchError(RuntimeError):
    """Raised when the design-SNR search does not converge."""


@dataclass(frozen=True, eq=False)
class ReliabilityTable:
    """``p[j]``: cumulative BLER once position ``j`` is activated; ``pi``: activation order."""

    p: np.ndarray
    pi: np.ndarray

    def bler_at(self, k: int) -> float:
        return 0.0 if k == 0 else float(self.p[self.pi[k - 1]])


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def _f(mu: float, exact: bool) -> float:
    if exact:
        return ga.f_evolve(mu)
    return float(ga.phi_table().f(mu))


def _bler(mu: float, n: int, k: int) -> float:
    if n == 1:
        return ga.bit_error(mu)
    return ga.leaf_bler(mu, n, k)


def override_dims(n: int) -> list[int]:
    lb = bit_length(n)
    return sorted(set(range(2, lb + 1)) | set(range(n - lb, n - 1)))


def is_leaf_length(n: int, leaf_size: int | None) -> bool:
    if leaf_size is not None:
        return n <= leaf_size or n % 2 == 1
    return n % 2 == 1 or n == 2


def evolve(mu: float, n: int, *, exact: bool = False, override: bool = True,
           leaf_size: int | None = None) -> ReliabilityTable:
    """Per-dimension BLERs of the best component combination at length ``n``.

    ``leaf_size`` replaces the default stopping rule (odd lengths and 2);
    ``leaf_size=1`` with ``override=False`` is plain polar DEGA construction.
    """
    if not supported_length(n) and leaf_size is None:
        raise ValueError(f"unsupported length {n}")
    mu = float(mu)
    if mu < 0 or math.isnan(mu):
        raise ValueError("mu must be non-negative")
    return _evolve(mu, n, exact, override, leaf_size)


@lru_cache(maxsize=65536)
def _evolve(mu: float, n: int, exact: bool, override: bool, leaf_size: int | None) -> ReliabilityTable:
    p = np.zeros(n)
    pi = np.zeros(n, dtype=np.int64)
    if is_leaf_length(n, leaf_size):
        for k in range(1, n + 1):
            p[n - k] = _bler(mu, n, k)
            pi[n - k] = k - 1
        return _freeze(p, pi)

    h = n // 2
    mu_u = _f(mu, exact) if not math.isinf(mu) else math.inf
    first = _evolve(mu_u, h, exact, override, leaf_size)
    second = _evolve(ga.g_evolve(mu), h, exact, override, leaf_size)
    u, sigma = first.p, first.pi
    v, tau = second.p, second.pi
    for name, child in (("u", first), ("v", second)):
        along = child.p[child.pi]
        if np.any(np.diff(along) < 0):
            log.debug("non-monotone %s-branch sequence merged at n=%d, mu=%g", name, n, mu)

    i = j = 0
    ut = vt = 0.0
    for k in range(1, n + 1):
        d1 = (u[sigma[i]] - ut) * (1 - vt) if i < h else math.inf
        d2 = (v[tau[j]] - vt) * (1 - ut) if j < h else math.inf
        if d1 < d2:
            ut = u[sigma[i]]
            pi[k - 1] = sigma[i]
            i += 1
        else:
            vt = v[tau[j]]
            pi[k - 1] = tau[j] + h
            j += 1
        p[pi[k - 1]] = ut + vt - ut * vt

    if override and leaf_size is None:
        for k in override_dims(n):
            p[pi[k - 1]] = min(p[pi[k - 1]], _bler(mu, n, k))
    return _freeze(p, pi)


def _freeze(p, pi) -> ReliabilityTable:
    p.setflags(write=False)
    pi.setflags(write=False)
    return ReliabilityTable(p, pi)


def design(n: int, k: int, es_n0: float, *, exact: bool = False, override: bool = True,
           leaf_size: int | None = None) -> RateProfile:
    """Rate profile activating the first ``k`` positions of the evolved order.

    ``es_n0`` is linear; the channel LLR mean is ``4 Es/N0``.
    """
    if not 0 <= k <= n:
        raise ValueError(f"dimension {k} outside [0, {n}]")
    table = evolve(4.0 * es_n0, n, exact=exact, override=override, leaf_size=leaf_size)
    bits = np.zeros(n, dtype=np.uint8)
    bits[table.pi[:k]] = 1
    return RateProfile(bits)


def evaluate(eb_n0: float, profile: RateProfile, *, exact: bool = False) -> float:
    """Analytic SC BLER of ``profile`` at linear ``Eb/N0``."""
    n, k = profile.n, profile.k
    if k == 0:
        return 0.0
    return evaluate_mu(4.0 * k / n * eb_n0, profile, exact=exact)


def evaluate_mu(mu: float, profile: RateProfile, *, exact: bool = False) -> float:
    n, k = profile.n, profile.k
    if k == 0:
        return 0.0
    if leaf_kind(n, k) is not None:
        return evolve(mu, n, exact=exact).bler_at(k)
    if n % 2:
        raise MalformedProfile(f"profile needs a split at odd length {n} (k = {k})")
    left, right = profile.halves()
    mu_u = _f(mu, exact) if not math.isinf(mu) else math.inf
    u = evaluate_mu(mu_u, left, exact=exact)
    v = evaluate_mu(ga.g_evolve(mu), right, exact=exact)
    return u + v - u * v


def design_for_target(n: int, k: int, target_bler: float, *, exact: bool = False,
                      lo_db: float = -10.0, hi_db: float = 30.0, rel_tol: float = 0.02,
                      max_iter: int = 100) -> tuple[RateProfile, float]:
    """Find the Es/N0 (dB) whose own design meets ``target_bler``.

    Returns ``(profile, design_es_n0_db)``; the SNR is NaN for ``k = 0``,
    whose BLER is zero everywhere.  When the objective jumps across
    the target (the design changes discontinuously), the bracket collapses
    onto the jump and the side meeting the target is returned.
    """
    if not 0 < target_bler < 1:
        raise ValueError("target BLER must lie in (0, 1)")
    if k == 0:
        return RateProfile(np.zeros(n, dtype=np.uint8)), math.nan

    def objective(db: float) -> tuple[float, RateProfile]:
        es = db_to_linear(db)
        prof = design(n, k, es, exact=exact)
        return evaluate_mu(4.0 * es, prof, exact=exact), prof

    p_lo, _ = objective(lo_db)
    p_hi, prof_hi = objective(hi_db)
    if p_lo < target_bler:
        raise SearchError(f"target {target_bler} already met at {lo_db} dB")
    if p_hi > target_bler:
        raise SearchError(f"target {target_bler} not reached at {hi_db} dB")
    best = (hi_db, prof_hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo_db + hi_db)
        p_mid, prof = objective(mid)
        if abs(p_mid / target_bler - 1) <= rel_tol:
            return prof, mid
        if p_mid > target_bler:
            lo_db = mid
        else:
            hi_db = mid
            best = (mid, prof)
        if hi_db - lo_db < 1e-9:
            log.info("objective jumps across the target near %.9f dB", hi_db)
            return best[1], best[0]
    raise SearchError(f"no convergence after {max_iter} iterations")


def ebn0_for_bler(profile: RateProfile, target: float, lo_db: float = -5.0, hi_db: float = 20.0,
                  tol_db: float = 1e-4) -> float:
    """Eb/N0 (dB) at which ``evaluate`` of a fixed profile equals ``target``."""
    for _ in range(200):
        mid = 0.5 * (lo_db + hi_db)
        if evaluate(db_to_linear(mid), profile) > target:
            lo_db = mid
        else:
            hi_db = mid
        if hi_db - lo_db < tol_db:
            break
    return 0.5 * (lo_db + hi_db)
