import itertools

import numpy as np
import pytest
from hypothesis import given, settings

from natdual import corpus
from natdual.algebra import make_algebra
from natdual.free import BudgetExceeded, free_algebra, lattice_reduct
from natdual.terms import eval_term

from conftest import algebras

BOUNDED_LATTICE = [("meet", 2), ("join", 2), ("0", 0), ("1", 0)]
TWO = make_algebra(BOUNDED_LATTICE, 2, {"meet": min, "join": max, "0": lambda: 0, "1": lambda: 1}, name="2")
BOOL = make_algebra(
    BOUNDED_LATTICE + [("neg", 1)], 2, {"meet": min, "join": max, "0": lambda: 0, "1": lambda: 1, "neg": lambda x: 1 - x}
)


def naive_free_size(M, s):
    """Close the projections of M^(M^s) under the operations, as Python tuples."""
    pts = list(itertools.product(range(M.size), repeat=s))
    elems = {tuple(p[j] for p in pts) for j in range(s)}
    for op, ar in M.signature:
        if ar == 0:
            elems.add((int(M.tables[op]),) * len(pts))
    while True:
        new = set()
        for op, ar in M.signature:
            t = M.tables[op]
            for args in itertools.product(elems, repeat=ar):
                row = tuple(int(t[tuple(a[k] for a in args)]) for k in range(len(pts)))
                if row not in elems:
                    new.add(row)
        if not new:
            return len(elems)
        elems |= new


@pytest.mark.parametrize("s,size", [(1, 3), (2, 6), (3, 20), (4, 168)])
def test_free_distributive_lattices_follow_dedekind_numbers(s, size):
    for method in ("closure", "lattice"):
        assert free_algebra(TWO, s, method=method).size == size


@pytest.mark.parametrize("s", [1, 2, 3])
def test_free_boolean_algebras(s):
    assert free_algebra(BOOL, s).size == 2 ** (2**s)


def test_free_de_morgan_on_one_generator(D4):
    assert free_algebra(D4, 1).size == 6


@pytest.mark.parametrize("name,size", [("D4", 168), ("K2", 414), ("K3", 3059), ("dS", 7776), ("MS", 8790)])
def test_two_generated_free_algebra_sizes(name, size):
    assert free_algebra(corpus.load_algebra(name), 2).size == size


def test_lattice_path_agrees_with_closure():
    for name in ("D4", "K2", "dS"):
        M = corpus.load_algebra(name)
        assert lattice_reduct(M) is not None
        a, b = free_algebra(M, 2, method="closure"), free_algebra(M, 2, method="lattice")
        assert {r.tobytes() for r in a.coords} == {r.tobytes() for r in b.coords}


@settings(max_examples=40)
@given(algebras(max_size=3))
def test_free_size_matches_naive_closure(A):
    assert free_algebra(A, 1).size == naive_free_size(A, 1)
    if A.size <= 2:
        assert free_algebra(A, 2).size == naive_free_size(A, 2)


def test_term_representatives_denote_their_elements():
    M = corpus.load_algebra("MS")
    F = free_algebra(M, 2)
    rng = np.random.default_rng(0)
    for i in rng.choice(F.size, 200, replace=False):
        t = F.term(int(i))
        row = [eval_term(t, M, list(p)) for p in F.points]
        assert row == F.coords[i].tolist()


def test_generators_are_projections_and_evaluate(D4):
    F = free_algebra(D4, 2)
    for j, g in enumerate(F.generators):
        assert F.coords[g].tolist() == [p[j] for p in F.points]
        assert F.evaluate(g, (1, 2)) == (1, 2)[j]


def test_free_algebra_table_is_closed(D4):
    F = free_algebra(D4, 2)
    A = F.algebra
    meet = A.tables["meet"]
    i, j = 17, 101
    want = D4.tables["meet"][F.coords[i].astype(int), F.coords[j].astype(int)]
    assert F.coords[meet[i, j]].tolist() == want.tolist()


def test_memory_budget_is_enforced(D4):
    with pytest.raises(BudgetExceeded):
        free_algebra(D4, 2, memory_budget=2000)
