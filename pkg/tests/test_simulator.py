import dataclasses
import math

import numpy as np
import pytest

from orcas import ga
from orcas.designer import db_to_linear, design
from orcas.simulator import (
    ChannelConfig,
    Codec,
    StopRule,
    channel_llr,
    chunk_generator,
    measure_throughput,
    modulate,
    orcas_codec,
    run_point,
    run_sweep,
)
from orcas.tree import RateProfile


@pytest.fixture(scope="module")
def codec96():
    return orcas_codec(design(96, 48, db_to_linear(3.0957)))


def majority3():
    def enc(m):
        return np.repeat(np.asarray(m, np.uint8), 3, axis=1)

    def dec(llr):
        bits = ((llr < 0).sum(axis=1) >= 2).astype(np.uint8)[:, None]
        return bits, enc(bits)

    return Codec("majority-3", 3, 1, enc, dec)


def test_modulate_and_llr():
    assert modulate([0, 1, 0]).tolist() == [1.0, -1.0, 1.0]
    assert modulate(np.zeros(4)).tolist() == [1.0] * 4
    bits = np.random.default_rng(0).integers(0, 2, 100)
    assert np.array_equal((modulate(bits) < 0).astype(int), bits)
    assert channel_llr(0.0, 0.7) == 0.0
    assert channel_llr(0.7**2 / 2, 0.7) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        channel_llr(1.0, 0.0)


def test_channel_config():
    c = ChannelConfig(3.0, 0.5)
    assert c.sigma == pytest.approx(1 / math.sqrt(2 * 0.5 * db_to_linear(3.0)))
    assert c.es_n0 == pytest.approx(1 / (2 * c.sigma**2))
    with pytest.raises(ValueError):
        ChannelConfig(1.0, 0.0)


def test_noise_calibration():
    sigma = 0.8
    z = sigma * chunk_generator(7, 0).standard_normal(1_000_000)
    assert z.var() == pytest.approx(sigma**2, rel=0.01)
    llr = channel_llr(1.0 + z, sigma)
    assert llr.mean() == pytest.approx(2 / sigma**2, rel=0.01)


def test_chunk_streams_are_distinct_and_repeatable():
    a = chunk_generator(1, 0).standard_normal(8)
    assert np.array_equal(a, chunk_generator(1, 0).standard_normal(8))
    assert not np.array_equal(a, chunk_generator(1, 1).standard_normal(8))
    assert not np.array_equal(a, chunk_generator(2, 0).standard_normal(8))


def test_noiseless_limit(codec96):
    r = run_point(codec96, 40.0, StopRule(1, 1000), seed=3)
    assert r.frames == 1000 and r.frame_errors == 0 and r.bit_errors == 0


def test_determinism(codec96):
    a = run_point(codec96, 3.0, StopRule(30, 20_000), seed=11)
    b = run_point(codec96, 3.0, StopRule(30, 20_000), seed=11)
    strip = lambda r: dataclasses.replace(r, elapsed=0.0)
    assert strip(a) == strip(b)
    c = run_point(codec96, 3.0, StopRule(30, 20_000), seed=12)
    assert strip(a) != strip(c)


def test_chunks_are_order_independent(codec96):
    # a two-chunk run equals the sum of its chunks simulated on their own
    whole = run_point(codec96, 2.5, StopRule(10**6, 400), seed=5, chunk_frames=200)
    from orcas.simulator import _draw

    errs = 0
    for i in (1, 0):
        msg, _, llr = _draw(codec96, chunk_generator(5, i), 200, ChannelConfig(2.5, 0.5).sigma, False)
        errs += int((codec96.decode(llr)[0] != msg).any(axis=1).sum())
    assert whole.frame_errors == errs


def test_majority_repetition_closed_form():
    cfg = ChannelConfig(2.0, 1 / 3)
    p = ga.q_func(1 / cfg.sigma)
    ref = 3 * p**2 * (1 - p) + p**3
    r = run_point(majority3(), cfg, StopRule(2000, 10**6), seed=1)
    assert abs(r.bler - ref) <= 3 * math.sqrt(ref * (1 - ref) / r.frames)


def test_soft_repetition_closed_form():
    codec = orcas_codec(RateProfile([0, 0, 1]))
    cfg = ChannelConfig(1.0, 1 / 3)
    ref = ga.q_func(math.sqrt(3) / cfg.sigma)
    r = run_point(codec, cfg, StopRule(2000, 10**6), seed=2)
    assert abs(r.bler - ref) <= 3 * math.sqrt(ref * (1 - ref) / r.frames)


def test_sweep(codec96):
    assert run_sweep(codec96, []) == []
    recs = run_sweep(codec96, [2.0, 3.0, 4.0], StopRule(100, 200_000), seed=4)
    assert [r.eb_n0_db for r in recs] == [2.0, 3.0, 4.0]
    for a, b in zip(recs, recs[1:]):
        assert b.bler <= a.bler + 3 * (a.stderr() + b.stderr())
    for r in recs:
        assert r.frame_errors == r.codeword_errors
        assert r.frame_errors <= r.frames


def test_all_zero_mode_agrees(codec96):
    a = run_point(codec96, 3.0, StopRule(400, 10**6), seed=8)
    b = run_point(codec96, 3.0, StopRule(400, 10**6), seed=8, all_zero=True)
    sd = math.sqrt(a.stderr() ** 2 + b.stderr() ** 2)
    assert abs(a.bler - b.bler) <= 4 * sd


def test_stop_rule():
    with pytest.raises(ValueError):
        StopRule(0, 10)
    r = run_point(majority3(), -5.0, StopRule(50, 10**6), seed=0, chunk_frames=100)
    assert r.frame_errors >= 50 and r.frames == 100 * math.ceil(r.frames / 100)


def test_throughput_positive(codec96):
    assert measure_throughput(codec96, duration=0.2, batch=200) > 0
