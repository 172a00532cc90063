import itertools

import numpy as np
import pytest
from hypothesis import given

from natdual import corpus
from natdual.algebra import (
    AlgebraError,
    FiniteAlgebra,
    Signature,
    all_subuniverses,
    generating_set,
    induced_subalgebra,
    make_algebra,
    minimal_generator_count,
    product,
    subalgebra_closure,
    trivial_algebra,
)
from natdual.terms import App, Var, eval_term

from conftest import algebras


def test_d4_double_negation_and_de_morgan_laws(D4):
    neg, meet, join = D4.tables["neg"], D4.tables["meet"], D4.tables["join"]
    for x in range(4):
        assert neg[neg[x]] == x
        for y in range(4):
            assert neg[meet[x, y]] == join[neg[x], neg[y]]
            assert neg[join[x, y]] == meet[neg[x], neg[y]]


def test_l6_involution_swaps_bounds_and_c_d():
    L6 = corpus.load_algebra("L6")
    inv = {L6.label(x): L6.label(int(L6.tables["inv"][x])) for x in range(6)}
    assert inv == {"0": "1", "1": "0", "c": "d", "d": "c", "a": "a", "b": "b"}


def test_table_shape_and_range_are_checked():
    sig = Signature.of(("f", 1))
    with pytest.raises(AlgebraError):
        FiniteAlgebra(sig, 3, {"f": np.array([0, 1])})
    with pytest.raises(AlgebraError):
        FiniteAlgebra(sig, 2, {"f": np.array([0, 2])})
    with pytest.raises(AlgebraError):
        FiniteAlgebra(sig, 2, {})


def test_constant_tables_stay_zero_dimensional(D4):
    assert D4.tables["0"].shape == ()
    sub, inc = induced_subalgebra(D4, [0, 3])
    assert sub.size == 2 and sub.tables["1"].shape == ()
    assert inc.map == (0, 3)


def test_product_is_coordinatewise(D4):
    P = product([D4, D4])
    assert P.size == 16
    for x, y in itertools.product(range(16), repeat=2):
        a, b = divmod(x, 4), divmod(y, 4)
        want = int(D4.tables["meet"][a[0], b[0]]) * 4 + int(D4.tables["meet"][a[1], b[1]])
        assert P.tables["meet"][x, y] == want


def test_bare_set_has_every_subset_as_subuniverse():
    A = make_algebra([], 3, {})
    assert len(all_subuniverses(A)) == 7
    assert minimal_generator_count(A) == 3


def test_corpus_generator_counts():
    for name in ("D4", "MS", "K2", "K3", "dS", "L6", "L5"):
        assert minimal_generator_count(corpus.load_algebra(name)) <= 2


def test_generating_set_generates(D42bar):
    g = generating_set(D42bar)
    assert len(subalgebra_closure(D42bar, g)) == D42bar.size


def test_trivial_algebra_is_trivial():
    T = trivial_algebra(Signature.of(("f", 1), ("c", 0)))
    assert T.is_trivial()
    assert eval_term(App("f", (App("c"),)), T, {}) == 0


def _closed(A, S):
    S = set(S)
    for op, ar in A.signature:
        for xs in itertools.product(sorted(S), repeat=ar):
            if int(A.tables[op][xs]) not in S:
                return False
    return True


@given(algebras(max_size=4))
def test_subuniverses_match_brute_force(A):
    want = {tuple(S) for k in range(1, A.size + 1) for S in itertools.combinations(range(A.size), k) if _closed(A, S)}
    assert set(all_subuniverses(A)) == want


@given(algebras(max_size=5))
def test_closure_is_least_closed_superset(A):
    for x in range(A.size):
        S = subalgebra_closure(A, [x])
        assert _closed(A, S) and x in S
        assert all(not _closed(A, T) for T in itertools.combinations(S, len(S) - 1) if x in T)


@given(algebras(max_size=4))
def test_closure_limit_gives_up(A):
    full = subalgebra_closure(A, [0])
    if len(full) > 1:
        assert subalgebra_closure(A, [0], limit=len(full) - 1) is None
    assert subalgebra_closure(A, [0], limit=len(full)) == full


def test_eval_term_on_variables(D4):
    t = App("meet", (Var(0), App("neg", (Var(1),))))
    assert eval_term(t, D4, [3, 0]) == 3
