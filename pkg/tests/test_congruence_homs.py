import itertools

from hypothesis import given

from natdual import corpus
from natdual.algebra import product
from natdual.congruence import (
    Congruence,
    congruence_lattice,
    generated_congruence,
    identity_congruence,
    principal_congruence,
    quotient,
)
from natdual.congruence import _canonical
from natdual.homs import embeds, endomorphisms, enumerate_homomorphisms, first_homomorphism, is_homomorphic_image, is_isomorphic

from conftest import algebras, brute_homs, compatible, partitions


@given(algebras(max_size=5))
def test_congruence_lattice_matches_all_compatible_partitions(A):
    want = {_canonical(p) for p in partitions(A.size) if compatible(A, p)}
    assert {c.rep for c in congruence_lattice(A)} == want


@given(algebras(max_size=5))
def test_principal_congruence_is_least(A):
    cons = [p for p in partitions(A.size) if compatible(A, p)]
    for a, b in itertools.combinations(range(A.size), 2):
        theta = principal_congruence(A, a, b)
        assert theta.related(a, b)
        for p in cons:
            if p[a] == p[b]:
                assert theta <= Congruence(A, _canonical(p))


@given(algebras(max_size=5))
def test_quotient_projection_is_a_homomorphism(A):
    for theta in congruence_lattice(A):
        Q, proj = quotient(A, theta)
        assert Q.size == theta.block_count()
        assert proj.map in brute_homs(A, Q) or A.size > 4


@given(algebras(max_size=4), algebras(max_size=3))
def test_homomorphisms_match_brute_force(A, B):
    got = {h.map for h in enumerate_homomorphisms(A, B)}
    assert got == set(brute_homs(A, B))
    surj = {h.map for h in enumerate_homomorphisms(A, B, "surjective")}
    assert surj == {m for m in got if len(set(m)) == B.size}
    inj = {h.map for h in enumerate_homomorphisms(A, B, "injective")}
    assert inj == {m for m in got if len(set(m)) == A.size}


def test_endomorphism_counts():
    counts = {name: len(endomorphisms(corpus.load_algebra(name))) for name in ("D4", "MS", "dS", "L6")}
    assert counts == {"D4": 2, "MS": 3, "dS": 3, "L6": 4}


def test_isomorphism_of_relabelled_copy(D4):
    perm = (2, 0, 3, 1)
    inv = {p: i for i, p in enumerate(perm)}
    tables = {}
    for op, ar in D4.signature:
        t = D4.tables[op]
        if ar == 0:
            tables[op] = perm[int(t)]
        else:
            import numpy as np

            arr = np.empty((4,) * ar, dtype=np.int64)
            for xs in itertools.product(range(4), repeat=ar):
                arr[xs] = perm[int(t[tuple(inv[x] for x in xs)])]
            tables[op] = arr
    from natdual.algebra import FiniteAlgebra

    B = FiniteAlgebra(D4.signature, 4, tables)
    ok, h = is_isomorphic(D4, B)
    assert ok and h.map == perm


def test_embedding_and_image_queries(D4):
    two = corpus.load_algebra("dS")
    P = product([D4, D4])
    assert embeds(D4, P)
    assert is_homomorphic_image(D4, P)
    assert first_homomorphism(P, D4, "surjective") is not None
    assert not embeds(P, D4)
    assert not is_isomorphic(D4, two)[0] or D4.signature != two.signature


def test_generated_congruence_of_pairs(D4):
    theta = generated_congruence(D4, [(0, 1)])
    assert theta.related(2, 3)  # neg carries 0~a to 1~a
    assert generated_congruence(D4, []) == identity_congruence(D4)
