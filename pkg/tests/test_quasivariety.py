import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from natdual import corpus
from natdual.algebra import AlgebraError, all_subuniverses, induced_subalgebra, product
from natdual.free import free_algebra
from natdual.homs import is_isomorphic
from natdual.quasivariety import (
    generates_same,
    in_ISP,
    is_q_subdirectly_irreducible,
    min_gen_set_bfs,
    min_gen_set_dfs,
    multiset_leq,
    q_congruences,
    sub_pre_hom,
)

from conftest import algebras, brute_homs, random_algebra


def separated_by_homs(C, K):
    maps = [m for B in K for m in brute_homs(C, B)]
    return all(any(m[a] != m[b] for m in maps) for a, b in itertools.combinations(range(C.size), 2))


@settings(max_examples=60)
@given(algebras(max_size=4), st.lists(algebras(max_size=3), min_size=1, max_size=2))
def test_membership_matches_point_separation(C, K):
    report = in_ISP(C, K)
    assert bool(report) == separated_by_homs(C, K)
    if report:
        for a, b in itertools.combinations(range(C.size), 2):
            assert any(h.map[a] != h.map[b] for h in report.witnesses)
    else:
        a, b = report.unseparated
        assert all(h.map[a] == h.map[b] for h in report.witnesses)


def test_membership_examples(D4, D42bar):
    assert in_ISP(product([D4, D4]), [D4])
    assert in_ISP(D42bar, [D4])
    assert not in_ISP(D4, [induced_subalgebra(D4, [0, 3])[0]])


def desc_lex_leq(x, y):
    return sorted(x, reverse=True) <= sorted(y, reverse=True)


def test_multiset_order_against_descending_lex():
    rng = random.Random(7)
    ms = [[rng.randrange(6) for _ in range(rng.randrange(5))] for _ in range(1000)]
    for x, y in zip(ms, ms[1:] + ms[:1]):
        assert multiset_leq(x, y) == desc_lex_leq(x, y)
        assert multiset_leq(x, y) or multiset_leq(y, x)
    for x, y, z in zip(ms, ms[1:], ms[2:]):
        if multiset_leq(x, y) and multiset_leq(y, z):
            assert multiset_leq(x, z)
    for x in ms[:50]:
        for y in ms[:50]:
            assert multiset_leq(x, y) == desc_lex_leq(x, y)


def _same_classes(K1, K2):
    return len(K1) == len(K2) and all(any(is_isomorphic(A, B)[0] for B in K2) for A in K1)


def _check_minimal(out, K):
    if not out:
        # the empty product already gives the trivial algebra
        assert all(A.is_trivial() for A in K)
        return
    assert generates_same(out, K)
    for i in range(len(out)):
        rest = out[:i] + out[i + 1 :]
        if rest:
            assert not generates_same(rest, K)


CORPUS_INPUTS = [["D4"], ["D42bar"], ["MS"], ["K2"], ["K3"], ["dS"], ["L6"], ["L5"], ["D4", "D42bar"]]


@pytest.mark.parametrize("names", CORPUS_INPUTS, ids=lambda ns: "+".join(ns))
def test_bfs_and_dfs_agree_on_corpus(names):
    K = [corpus.load_algebra(n) for n in names]
    a, b = min_gen_set_bfs(K), min_gen_set_dfs(K)
    assert _same_classes(a, b)
    _check_minimal(a, K)


def test_bfs_and_dfs_agree_on_random_algebras():
    rng = np.random.default_rng(11)
    for _ in range(20):
        A = random_algebra(rng, int(rng.integers(1, 7)))
        a, b = min_gen_set_bfs([A]), min_gen_set_dfs([A])
        assert _same_classes(a, b)
        _check_minimal(a, [A])


def test_minimal_generating_set_examples(D4, D42bar):
    out = min_gen_set_dfs([D42bar])
    assert len(out) == 1 and is_isomorphic(out[0], D42bar)[0]
    assert len(min_gen_set_bfs([D4, D4])) == 1
    out = min_gen_set_bfs([product([D4, D4])])
    assert len(out) == 1 and is_isomorphic(out[0], D4)[0]
    with pytest.raises(AlgebraError):
        min_gen_set_bfs([])


def test_q_subdirect_irreducibility(D4, D42bar):
    assert is_q_subdirectly_irreducible(D4, [D4])
    assert is_q_subdirectly_irreducible(D42bar, [D42bar])
    assert not is_q_subdirectly_irreducible(D42bar, [D4])
    assert not is_q_subdirectly_irreducible(product([D4, D4]), [D4])
    assert len(q_congruences(D4, [D4])) == 2


def test_sub_pre_hom_on_free_de_morgan(D4):
    F = free_algebra(D4, 2).algebra
    C, universe, h = sub_pre_hom(F, D4)
    assert C.size == len(universe) == 10
    assert h.is_surjective()


@settings(max_examples=40)
@given(algebras(max_size=4), algebras(max_size=3))
def test_sub_pre_hom_is_smallest(A, B):
    sizes = [len(S) for S in all_subuniverses(A) if any(len(set(m)) == B.size for m in brute_homs(induced_subalgebra(A, S)[0], B))]
    if not sizes:
        with pytest.raises(AlgebraError):
            sub_pre_hom(A, B)
        return
    C, universe, h = sub_pre_hom(A, B)
    assert len(universe) == min(sizes)
    assert len(set(h.map)) == B.size
