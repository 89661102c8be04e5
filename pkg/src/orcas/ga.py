"""Gaussian-approximation density evolution primitives.

LLR densities are modelled as N(mu, 2 mu) and tracked by their mean only.
The phi functional is evaluated by adaptive quadrature in two
cancellation-free forms: ``log phi(x)`` (good everywhere, and the only
usable form once phi underflows) and ``psi(x) = 1 - phi(x)`` (needed for
small ``x`` where phi is within rounding of 1).  The check-node update
``f`` and its two-input generalisation stay in whichever form is accurate.

``PhiTable`` is a monotone cubic (PCHIP) lookup over ``log mu`` for bulk use
in the designer and the polar construction.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import PchipInterpolator

from .bitmath import bit_length
from .nprs import WeightDistribution, nprs_weight_distribution
from .nprsd import nprsd_weight_distribution

_LOG_NORM = -0.5 * math.log(2 * math.pi)
_LOG2 = math.log(2.0)

# below this phi is evaluated by its Taylor series: psi = x/2 - x^2/4 + 5x^3/24
SERIES_MAX = 1e-7
# psi quadrature is used up to here; beyond it only log phi is evaluated
PSI_MAX = 30.0


def q_func(x):
    """Gaussian tail probability ``P(N(0,1) > x)``."""
    return special.ndtr(-np.asarray(x, dtype=float)) if np.ndim(x) else float(special.ndtr(-x))


def log_q(x):
    return special.log_ndtr(-np.asarray(x, dtype=float)) if np.ndim(x) else float(special.log_ndtr(-x))


@lru_cache(maxsize=65536)
def log_phi(x: float) -> float:
    """``log phi(x)`` for ``x >= 0``."""
    if x < 0:
        raise ValueError("phi is defined for x >= 0")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return -math.inf
    if x < SERIES_MAX:
        return math.log1p(-_psi_series(x))
    s = math.sqrt(2 * x)

    def h(z):
        return _LOG2 + special.log_expit(-(x + s * z)) - 0.5 * z * z + _LOG_NORM

    # h is concave with its maximum in (-s, 0)
    zs = optimize.brentq(lambda z: -s * special.expit(x + s * z) - z, -s, 0.0, xtol=1e-15)
    hs = h(zs)
    us = x + s * zs
    curv = 1 + s * s * special.expit(us) * special.expit(-us)
    w = 8 / math.sqrt(curv)
    pts = (zs - 14, zs - w, zs, zs + w, zs + 14)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(lambda z: math.exp(h(z) - hs), a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
    return hs + math.log(total)


def _psi_series(x: float) -> float:
    return x / 2 - x * x / 4 + 5 * x ** 3 / 24


@lru_cache(maxsize=65536)
def psi(x: float) -> float:
    """``1 - phi(x)``, accurate in relative terms for small ``x``."""
    if x < 0:
        raise ValueError("phi is defined for x >= 0")
    if x == 0:
        return 0.0
    if x < SERIES_MAX:
        return _psi_series(x)
    if x > PSI_MAX:
        return -math.expm1(log_phi(x))
    s = math.sqrt(2 * x)
    sh = math.sinh(x)

    # E[tanh(U/2)] folded around the mean: tanh(A) + tanh(B) with A + B = x
    def g(z):
        sz = s * z
        m = max(x, sz)
        den = math.exp(x - m) + math.exp(-x - m) + math.exp(sz - m) + math.exp(-sz - m)
        return 4 * sh * math.exp(-m) / den * math.exp(-0.5 * z * z + _LOG_NORM)

    return integrate.quad(g, 0, 40, epsabs=0, epsrel=1e-13, limit=200)[0]


def phi(x: float) -> float:
    """phi(x) = 1 - E[tanh(L/2)] for L ~ N(x, 2x); phi(0) = 1."""
    if x < 2:
        return 1.0 - psi(x)
    return math.exp(log_phi(x))


def _solve_log_mu(fun, target: float, t_lo: float, t_hi: float) -> float:
    """Find t with ``fun(exp(t)) == target`` for ``fun`` decreasing in t."""
    g = lambda t: fun(math.exp(t)) - target  # noqa: E731
    while g(t_lo) < 0:
        t_lo -= 5.0
    while g(t_hi) > 0:
        t_hi += 5.0
    return optimize.brentq(g, t_lo, t_hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)


def _mu_from_psi(target: float) -> float:
    """Inverse of ``psi`` for ``target`` in (0, 1)."""
    if target <= 0:
        return 0.0
    if target < SERIES_MAX / 4:
        # invert the series by two fixed-point steps
        x = 2 * target
        for _ in range(3):
            x = 2 * (target + x * x / 4 - 5 * x ** 3 / 24)
        return x
    t0 = math.log(2 * target)
    return math.exp(_solve_log_mu(lambda m: -psi(m), -target, t0 - 2, t0 + 2))


def _mu_from_log_phi(target: float) -> float:
    """Inverse of ``log_phi`` for ``target`` < 0."""
    if target == -math.inf:
        return math.inf
    guess = max(-4 * target, 1e-3)
    t0 = math.log(guess)
    return math.exp(_solve_log_mu(log_phi, target, t0 - 2, t0 + 1))


def phi_inv(y: float) -> float:
    if not 0 < y <= 1:
        raise ValueError(f"phi_inv needs y in (0, 1], got {y}")
    if y == 1:
        return 0.0
    if y > 0.5:
        return _mu_from_psi(1.0 - y)
    return _mu_from_log_phi(math.log(y))


def _combine(lp1: float, ps1: float, lp2: float, ps2: float) -> float:
    """Mean after a check node whose inputs have the given (log phi, psi)."""
    out_psi = ps1 * ps2
    if out_psi < 0.5:
        return _mu_from_psi(out_psi)
    # phi_out = phi1 + psi1 * phi2
    lp_out = np.logaddexp(lp1, lp2 + math.log(ps1)) if ps1 > 0 else lp1
    return _mu_from_log_phi(float(lp_out))


@lru_cache(maxsize=65536)
def f_evolve(mu: float) -> float:
    """Mean after the check-node (upper branch) update."""
    return f2_evolve(mu, mu)


def g_evolve(mu: float) -> float:
    """Mean after the variable-node (lower branch) update."""
    return 2.0 * mu


@lru_cache(maxsize=262144)
def f2_evolve(mu1: float, mu2: float) -> float:
    """Check-node update for two inputs with different means."""
    if mu1 < 0 or mu2 < 0:
        raise ValueError("means must be non-negative")
    if mu1 == 0 or mu2 == 0:
        return 0.0
    if math.isinf(mu1):
        return mu2
    if math.isinf(mu2):
        return mu1
    return _combine(log_phi(mu1), psi(mu1), log_phi(mu2), psi(mu2))


def bit_error(mu):
    """Hard-decision error rate Q(1/sigma) of an N(mu, 2mu) LLR, i.e. Q(sqrt(mu/2))."""
    mu = np.asarray(mu, dtype=float)
    out = special.ndtr(-np.sqrt(mu / 2))
    return out if out.ndim else float(out)


def union_bound(sigma: float, weights: WeightDistribution) -> float:
    """Sum over w >= 1 of A_w Q(sqrt(w)/sigma), clipped to [0, 1]."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    ws = [w for w, a in enumerate(weights.counts) if w > 0 and a]
    if not ws:
        return 0.0
    if math.isinf(sigma):
        return 1.0
    logs = [math.log(weights.counts[w]) + float(special.log_ndtr(-math.sqrt(w) / sigma)) for w in ws]
    total = math.fsum(math.exp(v) for v in logs)
    return min(max(total, 0.0), 1.0)


def uncoded_bler(mu: float, n: int) -> float:
    """1 - (1 - Q(1/sigma))^n for ``n`` hard-decided bits."""
    p = bit_error(mu)
    return -math.expm1(n * math.log1p(-p))


def leaf_weights(n: int, k: int) -> WeightDistribution:
    if k <= bit_length(n):
        return nprs_weight_distribution(n, k)
    if k >= n - bit_length(n):
        return nprsd_weight_distribution(n, k)
    raise ValueError(f"no leaf code for ({n}, {k})")


@lru_cache(maxsize=262144)
def leaf_bler(mu: float, n: int, k: int) -> float:
    """Union-bound BLER of the ``(n, k)`` leaf code, capped at uncoded transmission."""
    if mu < 0:
        raise ValueError("mu must be non-negative")
    weights = leaf_weights(n, k)
    if k == 0:
        return 0.0
    if math.isinf(mu):
        return 0.0
    cap = uncoded_bler(mu, n)
    if mu == 0:
        return cap
    return min(union_bound(math.sqrt(2.0 / mu), weights), cap)


class PhiTable:
    """PCHIP lookup of ``log phi`` and ``log psi`` over ``log mu``.

    Outside the grid the series (small mu) and the leading asymptotic term
    ``phi(x) ~ sqrt(pi/x) exp(-x/4)`` (large mu) take over.
    """

    def __init__(self, t_min: float = -16.0, t_max: float = 12.0, points: int = 2801):
        self.t = np.linspace(t_min, t_max, points)
        mu = np.exp(self.t)
        self.lphi = np.array([log_phi(float(m)) for m in mu])
        self.lpsi = np.array([math.log(psi(float(m))) for m in mu])
        self._lphi = PchipInterpolator(self.t, self.lphi)
        self._lpsi = PchipInterpolator(self.t, self.lpsi)
        # inverses are only needed where the inverted quantity is below ~1/2
        lo = self.lphi < math.log(0.9)
        self._lphi_inv_range = (self.lphi[lo][-1], self.lphi[lo][0])
        self._t_of_lphi = PchipInterpolator(self.lphi[lo][::-1], self.t[lo][::-1])
        lo = self.lpsi < math.log(0.9)
        self._lpsi_inv_range = (self.lpsi[lo][0], self.lpsi[lo][-1])
        self._t_of_lpsi = PchipInterpolator(self.lpsi[lo], self.t[lo])
        self.mu_min, self.mu_max = mu[0], mu[-1]

    def log_phi(self, mu):
        mu = np.asarray(mu, dtype=float)
        out = np.zeros_like(mu)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.log(mu)
            mid = (mu >= self.mu_min) & (mu <= self.mu_max)
            out[mid] = self._lphi(t[mid])
            lo = (mu > 0) & (mu < self.mu_min)
            out[lo] = np.log1p(-(mu[lo] / 2 - mu[lo] ** 2 / 4))
            hi = mu > self.mu_max
            out[hi] = 0.5 * np.log(np.pi / mu[hi]) - mu[hi] / 4
        return out

    def log_psi(self, mu):
        mu = np.asarray(mu, dtype=float)
        out = np.full_like(mu, -np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.log(mu)
            mid = (mu >= self.mu_min) & (mu <= self.mu_max)
            out[mid] = self._lpsi(t[mid])
            lo = (mu > 0) & (mu < self.mu_min)
            out[lo] = np.log(mu[lo] / 2 - mu[lo] ** 2 / 4)
            hi = mu > self.mu_max
            out[hi] = np.log(-np.expm1(0.5 * np.log(np.pi / mu[hi]) - mu[hi] / 4))
        return out

    def mu_from_log_phi(self, lp):
        lp = np.asarray(lp, dtype=float)
        out = np.empty_like(lp)
        lo_edge, hi_edge = self._lphi_inv_range
        mid = (lp >= lo_edge) & (lp <= hi_edge)
        out[mid] = np.exp(self._t_of_lphi(lp[mid]))
        big = (lp < lo_edge) & np.isfinite(lp)
        # invert -x/4 + 0.5 log(pi/x) = lp by a few Newton steps
        x = -4 * lp[big]
        for _ in range(6):
            x = x - (0.5 * np.log(np.pi / x) - x / 4 - lp[big]) / (-0.5 / x - 0.25)
        out[big] = x
        small = lp > hi_edge
        out[small] = np.array([phi_inv(math.exp(v)) for v in lp[small]])
        out[lp == 0] = 0.0
        out[np.isneginf(lp)] = np.inf
        return out

    def mu_from_log_psi(self, lps):
        lps = np.asarray(lps, dtype=float)
        out = np.empty_like(lps)
        lo_edge, hi_edge = self._lpsi_inv_range
        mid = (lps >= lo_edge) & (lps <= hi_edge)
        out[mid] = np.exp(self._t_of_lpsi(lps[mid]))
        small = lps < lo_edge
        out[small] = 2 * np.exp(lps[small])
        out[np.isneginf(lps)] = 0.0
        big = lps > hi_edge
        out[big] = np.array([_mu_from_psi(math.exp(v)) for v in lps[big]])
        return out

    def f2(self, mu1, mu2):
        """Vectorised two-input check-node update."""
        mu1 = np.asarray(mu1, dtype=float)
        mu2 = np.asarray(mu2, dtype=float)
        mu1, mu2 = np.broadcast_arrays(mu1, mu2)
        lps = self.log_psi(mu1) + self.log_psi(mu2)
        lp1, lp2 = self.log_phi(mu1), self.log_phi(mu2)
        with np.errstate(invalid="ignore"):
            lp = np.logaddexp(lp1, lp2 + self.log_psi(mu1))
        use_psi = lps < math.log(0.5)
        out = np.empty(np.broadcast(mu1, mu2).shape)
        out[use_psi] = self.mu_from_log_psi(lps[use_psi])
        out[~use_psi] = self.mu_from_log_phi(lp[~use_psi])
        out = np.where(np.isinf(mu1), mu2, out)
        out = np.where(np.isinf(mu2), mu1, out)
        out = np.where((mu1 == 0) | (mu2 == 0), 0.0, out)
        return out

    def f(self, mu):
        return self.f2(mu, mu)


_TABLE: PhiTable | None = None


def phi_table() -> PhiTable:
    """Process-wide table, built on first use."""
    global _TABLE
    if _TABLE is None:
        _TABLE = PhiTable()
    return _TABLE
