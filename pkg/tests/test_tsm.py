import dataclasses

import pytest

from natdual import corpus
from natdual.algebra import AlgebraError
from natdual.duality.structures import StructMorphism, StructureError, substructure_closure
from natdual.duality.tsm import (
    SearchExhausted,
    SearchStats,
    TSHint,
    configuration_from_hint,
    configuration_from_subset,
    search_ts_configuration,
    test_spaces_method,
    verify_ts_configuration,
)
from natdual.formats import parse_hint


def hinted(key):
    c = corpus.case(key)
    E = corpus.load_ego(c.ego)
    return c, E, configuration_from_hint(E, c.s, c.load_hint())


def test_de_morgan_hint_places_the_dual_as_stated():
    c, E, cfg = hinted("de-morgan")
    assert ok(cfg, E, c.s)
    assert sorted(cfg.labels()) == ["00", "aa", "ab", "ba", "bb"]
    eta = {cfg.dual.label(i): cfg.X.label(j) for i, j in enumerate(cfg.eta.map)}
    assert eta == {"0ab1": "ab", "0ba1": "ba"}
    # gamma is a retraction: each fibre holds exactly one point of X
    for x, p in enumerate(cfg.subset):
        assert cfg.gamma.map[p] == x


def ok(cfg, E, s):
    return verify_ts_configuration(cfg, E, s) == (True, None)


def test_verify_rejects_a_corrupted_gamma():
    c, E, cfg = hinted("de-morgan")
    m = list(cfg.gamma.map)
    aa = cfg.X.point("aa")
    bb = cfg.X.point("bb")
    p = cfg.subset[aa]
    m[p] = bb
    bad = dataclasses.replace(cfg, gamma=StructMorphism(cfg.power, cfg.X, tuple(m)))
    good, why = verify_ts_configuration(bad, E, c.s)
    assert not good and "gamma" in why


def test_verify_rejects_a_collapsing_eta():
    c, E, cfg = hinted("de-morgan")
    bad = dataclasses.replace(cfg, eta=StructMorphism(cfg.dual, cfg.X, (cfg.X.point("00"),) * 2))
    good, why = verify_ts_configuration(bad, E, c.s)
    assert not good and "eta" in why


def test_literal_ms_retraction_is_rejected():
    c = corpus.case("ms")
    M, E = corpus.load_algebra("MS"), corpus.load_ego("MS~")
    text = corpus._read(c.hint).replace("  ab -> ad\n", "").replace("  aa a0", "  ab aa a0")
    hint = parse_hint(text, M).hint
    with pytest.raises(StructureError, match="gamma does not preserve"):
        configuration_from_hint(E, c.s, hint)


def test_hint_outside_the_power_or_not_closed():
    c = corpus.case("de-morgan")
    E = corpus.load_ego(c.ego)
    with pytest.raises(StructureError):
        configuration_from_hint(E, 2, TSHint(((1, 2),)))
    with pytest.raises(StructureError, match="not in"):
        configuration_from_hint(E, 2, TSHint(((1, 2, 3),)))


def test_no_four_point_subset_of_the_de_morgan_test_space_works():
    c, E, cfg = hinted("de-morgan")
    for drop in cfg.subset:
        rest = tuple(p for p in cfg.subset if p != drop)
        if substructure_closure(cfg.power, rest) == rest:
            assert configuration_from_subset(E, c.s, rest) is None


@pytest.mark.parametrize("key", ["de-morgan", "ms", "k2", "double-stone"])
def test_search_finds_a_test_space_of_the_hinted_size(key):
    c, E, cfg = hinted(key)
    stats = SearchStats()
    found = search_ts_configuration(E, c.s, stats=stats)
    assert ok(found, E, c.s)
    assert found.X.size == cfg.X.size
    assert stats.examined >= 1


def test_search_is_deterministic():
    E = corpus.load_ego("dS~")
    a, b = search_ts_configuration(E, 2), search_ts_configuration(E, 2)
    assert a.subset == b.subset


def test_search_exhausts_below_the_minimum():
    E = corpus.load_ego("D4~")
    with pytest.raises(SearchExhausted) as e:
        search_ts_configuration(E, 2, size_cap=4)
    assert e.value.cap == 4


def test_pipeline_checks_its_inputs(D4, D4ego):
    with pytest.raises(AlgebraError):
        test_spaces_method(D4, D4ego, 1)
    with pytest.raises(AlgebraError):
        test_spaces_method(corpus.load_algebra("dS"), D4ego, 2)


def test_de_morgan_pipeline_trace(D4, D4ego, D42bar):
    from natdual.homs import is_isomorphic

    res = test_spaces_method(D4, D4ego, 2, hint=corpus.case("de-morgan").load_hint())
    assert res.dual.size == 2
    assert res.step4_skipped and len(res.survivors) == 1
    assert [a.size for a in res.algebras] == [10]
    assert is_isomorphic(res.algebras[0], D42bar)[0]
    assert set(res.timings) == {"dual", "configuration", "lattice", "evaluation"}
