import numpy as np
import pytest

from conftest import noisy_llr
from orcas import ga
from orcas.bitmath import all_messages
from orcas.polar import (
    PolarSpec,
    bit_reverse,
    construct_polar,
    dega_mus,
    dega_reliabilities,
    polar_bler,
    polar_design_for_target,
    polar_encode,
    polar_sc_decode,
    polar_sc_decode_plain,
    polar_transform,
    removed_positions,
)
from orcas.designer import db_to_linear

MATCHED = [
    (96, 24, "puncture", "bitrev"),
    (96, 48, "shorten", "natural"),
    (96, 72, "shorten", "natural"),
    (640, 160, "puncture", "natural"),
    (640, 320, "shorten", "bitrev"),
    (640, 480, "shorten", "natural"),
    (12, 6, "shorten", "bitrev"),
    (12, 6, "puncture", "bitrev"),
]


def test_transform_matches_kronecker():
    F = np.array([[1, 0], [1, 1]], dtype=np.int64)
    G = F
    for _ in range(3):
        G = np.kron(G, F)
    u = np.random.default_rng(1).integers(0, 2, (50, 16), dtype=np.uint8)
    assert np.array_equal(polar_transform(u), (u.astype(np.int64) @ G) % 2)
    assert np.array_equal(polar_transform(polar_transform(u)), u)


def test_bit_reverse():
    assert bit_reverse(np.arange(8), 3).tolist() == [0, 4, 2, 6, 1, 5, 3, 7]


def test_dega_single_stage():
    mu = 3.0
    p = dega_reliabilities(2, mu)
    assert p[0] == pytest.approx(ga.bit_error(ga.f_evolve(mu)), rel=1e-6)
    assert p[1] == pytest.approx(ga.bit_error(2 * mu), rel=1e-12)
    assert not dega_reliabilities(8, np.inf).any()
    with pytest.raises(ValueError):
        dega_reliabilities(12, 1.0)


def test_dega_vector_matches_scalar_recursion():
    def scalar(mu, n):
        if n == 1:
            return [mu]
        return scalar(ga.f_evolve(mu), n // 2) + scalar(2 * mu, n // 2)

    ref = np.array(scalar(4.0, 8))
    assert np.allclose(dega_mus(8, 4.0, exact=True), ref, rtol=1e-9)
    assert np.allclose(dega_mus(8, 4.0), ref, rtol=1e-6)


def test_unmatched_frozen_set():
    spec = construct_polar(8, 4, 1.0)
    p = dega_reliabilities(8, 4.0)
    assert set(np.flatnonzero(spec.frozen)) == set(np.argsort(p)[4:])
    with pytest.raises(ValueError):
        construct_polar(8, 9, 1.0)
    with pytest.raises(ValueError):
        construct_polar(96, 48, 1.0)


def test_reference_matching_patterns():
    s = construct_polar(96, 24, 1.0, "puncture", "bitrev")
    assert s.removed.tolist() == sorted(bit_reverse(np.arange(32), 7).tolist())
    assert s.removed.tolist() == list(range(0, 128, 4))
    s = construct_polar(640, 480, 1.0, "shorten", "natural")
    assert s.removed.tolist() == list(range(640, 1024))
    assert s.frozen[s.removed].all()


def test_bitrev_orders_coincide():
    for matching in ("puncture", "shorten"):
        for n in (96, 100, 80):
            a = removed_positions(128, n, matching, "bitrev")
            b = removed_positions(128, n, matching, "bitrev", reverse_first=True)
            assert np.array_equal(a, b)


@pytest.mark.parametrize("n,k,matching,order", MATCHED)
def test_spec_invariants(n, k, matching, order):
    s = construct_polar(n, k, db_to_linear(1.0), matching, order)
    assert s.frozen.size == s.mother_n and (~s.frozen).sum() == k
    assert s.removed.size == s.mother_n - n
    rng = np.random.default_rng(k)
    msgs = all_messages(k) if k <= 12 else rng.integers(0, 2, (500, k), dtype=np.uint8)
    u = np.zeros((len(msgs), s.mother_n), np.uint8)
    u[:, s.info] = msgs
    full = polar_transform(u)
    if matching == "shorten":
        assert not full[:, s.removed].any()
    x = polar_encode(s, msgs)
    assert x.shape == (len(msgs), n)
    assert np.array_equal(x, full[:, s.kept])


@pytest.mark.parametrize("n,k,matching,order", [(128, 64, "none", "natural")] + MATCHED[:3])
def test_noiseless_round_trip(n, k, matching, order):
    s = construct_polar(n, k, db_to_linear(1.0), matching, order)
    msgs = np.random.default_rng(9).integers(0, 2, (1000, k), dtype=np.uint8)
    x = polar_encode(s, msgs)
    m, c = polar_sc_decode(s, 1e3 * (1.0 - 2.0 * x))
    assert np.array_equal(m, msgs) and np.array_equal(c, x)


def test_length_two_repetition():
    s = construct_polar(2, 1, 1.0)
    assert s.info.tolist() == [1]
    llr = np.random.default_rng(2).standard_normal((500, 2))
    m, _ = polar_sc_decode(s, llr)
    assert np.array_equal(m[:, 0], (llr.sum(axis=1) < 0).astype(np.uint8))


@pytest.mark.parametrize("n,k,matching,order", [(128, 64, "none", "natural")] + MATCHED[:3])
def test_simplified_equals_plain_sc(n, k, matching, order):
    s = construct_polar(n, k, db_to_linear(1.0), matching, order)
    rng = np.random.default_rng(n + k)
    msgs = rng.integers(0, 2, (1000, k), dtype=np.uint8)
    llr = noisy_llr(rng, polar_encode(s, msgs), 0.8)
    a = polar_sc_decode(s, llr)
    b = polar_sc_decode_plain(s, llr)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_spec_validation():
    with pytest.raises(ValueError):
        PolarSpec(8, 8, 4, np.ones(8, bool))
    frozen = np.zeros(16, bool)
    frozen[:4] = True
    with pytest.raises(ValueError):
        PolarSpec(16, 12, 12, frozen, "shorten", "natural", np.arange(12, 16))


def test_design_for_target_and_bler():
    spec = polar_design_for_target(64, 32, 1e-4)
    es = 10 ** (spec.design_snr_db / 10)
    assert polar_bler(spec, es * 2) <= 1e-4
    assert polar_bler(spec, es * 2 * 0.97) > 1e-4 * 0.9
    bl = [polar_bler(spec, db_to_linear(s)) for s in np.linspace(0, 6, 13)]
    assert all(a >= b for a, b in zip(bl, bl[1:]))
