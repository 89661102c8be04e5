import itertools
import logging
import math

import numpy as np
import pytest

from orcas import ga
from orcas.designer import (
    SearchError,
    db_to_linear,
    design,
    design_for_target,
    evaluate,
    evolve,
    override_dims,
)
from orcas.polar import dega_reliabilities
from orcas.tree import MalformedProfile, RateProfile, build_tree, leaves_in_order, supported_length

REF96_DIMS = (2, 3, 8, 4, 9, 22)
# self-consistent design Es/N0 (dB) of (96, 48) for target BLER 1e-6, frozen from this implementation
REF96_DESIGN_DB = 3.0957


def test_leaf_cases():
    t = evolve(4.0, 2)
    assert sorted(t.pi.tolist()) == [0, 1]
    assert t.p[t.pi[0]] < t.p[t.pi[1]]
    assert t.bler_at(1) == pytest.approx(ga.leaf_bler(4.0, 2, 1))
    assert np.all(evolve(math.inf, 3).p == 0)


def test_unsupported_length():
    with pytest.raises(ValueError):
        evolve(1.0, 11)
    with pytest.raises(ValueError):
        evolve(-1.0, 8)


def test_override_dims():
    assert override_dims(96) == [2, 3, 4, 5, 6, 7, 89, 90, 91, 92, 93, 94]
    assert override_dims(4) == [1, 2, 3]


def test_pi_is_permutation_for_all_lengths():
    for n in range(1, 641):
        if supported_length(n):
            t = evolve(4 * db_to_linear(1.0), n)
            assert np.array_equal(np.sort(t.pi), np.arange(n)), n
            assert np.all((t.p >= 0) & (t.p <= 1))


def test_monotone_without_override():
    for n in (24, 96, 160, 256):
        t = evolve(4 * db_to_linear(2.0), n, override=False)
        along = t.p[t.pi]
        assert np.all(np.diff(along) >= 0)


def test_design_trivial_dims():
    es = db_to_linear(2.0)
    assert design(24, 0, es).k == 0
    assert design(24, 24, es).bits.all()
    prof = design(96, 48, es)
    assert (prof.n, prof.k) == (96, 48)


def test_96_48_prefix_counts():
    prof = design(96, 48, db_to_linear(REF96_DESIGN_DB))
    tree = build_tree(prof)
    assert tuple(l.k for l in leaves_in_order(tree)) == REF96_DIMS
    t = evolve(4 * db_to_linear(REF96_DESIGN_DB), 96)
    counts = np.zeros(6, int)
    bounds = np.cumsum([0, 24, 12, 12, 12, 12, 24])
    for j in t.pi[:48]:
        counts[np.searchsorted(bounds, j, side="right") - 1] += 1
    assert tuple(counts) == REF96_DIMS


def test_design_for_target_96_48():
    prof, db = design_for_target(96, 48, 1e-6)
    assert db == pytest.approx(REF96_DESIGN_DB, abs=1e-3)
    assert evaluate(db_to_linear(db) * 2, prof) == pytest.approx(1e-6, rel=0.02)


def test_evaluate_basics():
    assert evaluate(1.0, RateProfile(np.zeros(12))) == 0.0
    single = RateProfile.from_string("000000000111")
    eb = db_to_linear(2.0)
    mu = 4 * 3 / 12 * eb
    assert evaluate(eb, single) == pytest.approx(evolve(mu, 12).bler_at(3))
    assert evaluate(eb, single) == pytest.approx(ga.leaf_bler(mu, 12, 3))
    with pytest.raises(MalformedProfile):
        evaluate(eb, RateProfile([1] * 5 + [0] * 6 + [1] * 6 + [0] * 5))


def test_evaluate_monotone_in_snr():
    prof = design(96, 48, db_to_linear(REF96_DESIGN_DB))
    vals = [evaluate(db_to_linear(s), prof) for s in np.linspace(0, 6, 25)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("target", [0.1, 1e-3])
def test_repetition_closed_form(target):
    # union bound of the (2,1) code is Q(sqrt(mu)); invert it in closed form
    from scipy.special import ndtri
    es_ref = ndtri(1 - target) ** 2 / 4
    prof, db = design_for_target(2, 1, target)
    assert prof.bits.tolist() == [0, 1]
    assert ga.leaf_bler(4 * db_to_linear(db), 2, 1) == pytest.approx(target, rel=0.02)
    assert db == pytest.approx(10 * math.log10(es_ref), abs=0.05)


def test_repetition_half_is_out_of_reach():
    # BLER 1/2 of the (2,1) code needs Es/N0 -> 0, outside any finite bracket
    with pytest.raises(SearchError):
        design_for_target(2, 1, 0.5)


def test_target_search_errors():
    with pytest.raises(ValueError):
        design_for_target(24, 12, 1.5)
    with pytest.raises(SearchError):
        design_for_target(24, 12, 1e-6, hi_db=-5.0)
    prof, db = design_for_target(24, 0, 1e-3)
    assert prof.k == 0 and math.isnan(db)


def test_lower_targets_need_more_snr():
    dbs = [design_for_target(48, 24, t)[1] for t in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)]
    assert all(a <= b for a, b in zip(dbs, dbs[1:]))


def profiles(n, k):
    for ones in itertools.combinations(range(n), k):
        bits = np.zeros(n, np.uint8)
        bits[list(ones)] = 1
        prof = RateProfile(bits)
        try:
            build_tree(prof)
        except MalformedProfile:
            continue
        yield prof


@pytest.mark.parametrize("n", [4, 6, 12])
@pytest.mark.parametrize("snr_db", [0.0, 3.0])
def test_design_matches_exhaustive_search(n, snr_db):
    es = db_to_linear(snr_db)
    for k in range(1, n):
        vals = {p: evaluate(es * n / k, p) for p in profiles(n, k)}
        best = min(vals.values())
        ties = {p for p, v in vals.items() if v - best <= 1e-12 * max(best, 1e-300)}
        got = design(n, k, es)
        assert got in ties, (n, k)
        if len(ties) == 1:
            assert got == next(iter(ties))


@pytest.mark.parametrize("n", [8, 16, 64, 256])
def test_polar_mode_matches_dega(n):
    for snr_db in (0.0, 3.0):
        mu = 4 * db_to_linear(snr_db)
        t = evolve(mu, n, override=False, leaf_size=1)
        p = dega_reliabilities(n, mu)
        order = np.lexsort((-np.arange(n), p))
        for k in range(1, n + 1):
            if t.bler_at(k) >= 1 - 1e-9:
                break  # cumulative BLER saturated, order no longer resolvable
            assert set(t.pi[:k]) == set(order[:k]), (n, snr_db, k)


def test_exact_and_table_designs_agree():
    for n, k in [(24, 12), (48, 24), (96, 48)]:
        es = db_to_linear(2.5)
        a, b = design(n, k, es), design(n, k, es, exact=True)
        pa, pb = evaluate(es * n / k, a, exact=True), evaluate(es * n / k, b, exact=True)
        assert pa == pytest.approx(pb, rel=1e-6)


def test_non_monotone_diagnostic(caplog):
    from orcas.designer import _evolve

    _evolve.cache_clear()
    with caplog.at_level(logging.DEBUG, logger="orcas.designer"):
        evolve(4 * db_to_linear(0.0), 640)
    msgs = [r.getMessage() for r in caplog.records]
    assert msgs and all("non-monotone" in m for m in msgs)
