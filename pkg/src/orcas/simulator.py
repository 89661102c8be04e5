"""BI-AWGN Monte Carlo engine with counter-based seeding.

Every chunk of frames draws from its own Philox stream keyed by
``seed + (chunk_index << 64)`` (numpy's Philox4x64-10), so results are
reproducible across platforms and independent of execution order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .polar import PolarSpec, polar_encode, polar_sc_decode
from .tree import RateProfile, build_tree, encode, sc_decode

RNG_ALGORITHM = "philox4x64-10/v1"
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Codec:
    """Batched encoder/decoder pair; ``decode`` returns ``(messages, codewords)``."""

    name: str
    n: int
    k: int
    encode: Callable[[np.ndarray], np.ndarray]
    decode: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def orcas_codec(profile: RateProfile, name: str | None = None, exact_boxplus: bool = False) -> Codec:
    tree = build_tree(profile)
    return Codec(
        name or f"orcas({profile.n},{profile.k})",
        profile.n,
        profile.k,
        lambda m: encode(tree, m),
        lambda llr: sc_decode(tree, llr, exact_boxplus=exact_boxplus),
    )


def polar_codec(spec: PolarSpec, name: str | None = None) -> Codec:
    return Codec(
        name or f"polar({spec.n},{spec.k})",
        spec.n,
        spec.k,
        lambda m: polar_encode(spec, m),
        lambda llr: polar_sc_decode(spec, llr),
    )


@dataclass(frozen=True)
class ChannelConfig:
    eb_n0_db: float
    rate: float

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError("rate must lie in (0, 1]")

    @property
    def es_n0(self) -> float:
        return self.rate * 10 ** (self.eb_n0_db / 10)

    @property
    def sigma(self) -> float:
        return 1.0 / math.sqrt(2.0 * self.es_n0)


@dataclass(frozen=True)
class StopRule:
    min_errors: int = 100
    max_frames: int = 10_000_000

    def __post_init__(self):
        if self.min_errors < 1 or self.max_frames < 1:
            raise ValueError("stopping thresholds must be positive")


@dataclass(frozen=True)
class TrialRecord:
    code_id: str
    eb_n0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    codeword_errors: int
    elapsed: float
    seed: int
    k: int

    @property
    def bler(self) -> float:
        return self.frame_errors / self.frames if self.frames else float("nan")

    @property
    def ber(self) -> float:
        bits = self.frames * self.k
        return self.bit_errors / bits if bits else float("nan")

    def stderr(self) -> float:
        """Binomial standard deviation of the BLER estimate."""
        p = self.bler
        return math.sqrt(p * (1 - p) / self.frames) if self.frames else float("nan")


def modulate(c) -> np.ndarray:
    """BPSK: bit 0 -> +1, bit 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(c, dtype=float)


def channel_llr(y, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 2.0 * np.asarray(y, dtype=float) / sigma**2


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    """Independent stream for chunk ``chunk`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(key=(seed & SEED_MASK) + (chunk << 64)))


def _draw(codec: Codec, rng: np.random.Generator, frames: int, sigma: float, all_zero: bool):
    if all_zero or codec.k == 0:
        msg = np.zeros((frames, codec.k), dtype=np.uint8)
    else:
        msg = rng.integers(0, 2, size=(frames, codec.k), dtype=np.uint8)
    cw = np.atleast_2d(codec.encode(msg))
    y = modulate(cw) + sigma * rng.standard_normal(cw.shape)
    return msg, cw, channel_llr(y, sigma)


def run_point(codec: Codec, config: ChannelConfig | float, stop: StopRule | None = None,
              seed: int = 0, chunk_frames: int = 1000, all_zero: bool = False) -> TrialRecord:
    """Simulate one SNR point, stopping at ``stop.min_errors`` frame errors or ``stop.max_frames``.

    The stopping test runs between chunks, so counts are chunk-granular.
    A frame error is a message mismatch; codeword mismatches are counted too.
    """
    if not isinstance(config, ChannelConfig):
        config = ChannelConfig(float(config), codec.k / codec.n if codec.k else 1.0)
    stop = stop or StopRule()
    sigma = config.sigma
    frames = fe = be = ce = 0
    chunk = 0
    t0 = time.perf_counter()
    while frames < stop.max_frames and fe < stop.min_errors:
        b = min(chunk_frames, stop.max_frames - frames)
        msg, cw, llr = _draw(codec, chunk_generator(seed, chunk), b, sigma, all_zero)
        m_hat, c_hat = codec.decode(llr)
        wrong = m_hat != msg
        fe += int(wrong.any(axis=1).sum())
        be += int(wrong.sum())
        ce += int((c_hat != cw).any(axis=1).sum())
        frames += b
        chunk += 1
    return TrialRecord(codec.name, config.eb_n0_db, frames, fe, be, ce,
                       time.perf_counter() - t0, seed, codec.k)


def run_sweep(codec: Codec, eb_n0_db: Sequence[float], stop: StopRule | None = None, seed: int = 0,
              **kwargs) -> list[TrialRecord]:
    return [run_point(codec, float(s), stop, seed, **kwargs) for s in eb_n0_db]


def measure_throughput(codec: Codec, duration: float = 1.0, eb_n0_db: float = 2.0,
                       batch: int = 2000, seed: int = 0) -> float:
    """Decoded codewords per second on pre-generated noisy frames (single process)."""
    rate = codec.k / codec.n if codec.k else 1.0
    sigma = ChannelConfig(eb_n0_db, rate).sigma
    _, _, llr = _draw(codec, chunk_generator(seed, 0), batch, sigma, False)
    codec.decode(llr[:8])  # warm caches
    frames = 0
    t0 = time.perf_counter()
    while True:
        codec.decode(llr)
        frames += batch
        dt = time.perf_counter() - t0
        if dt >= duration:
            return frames / dt
