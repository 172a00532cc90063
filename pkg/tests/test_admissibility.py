import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from natdual import corpus
from natdual.admissibility import (
    check_validity,
    counterexample_substitution,
    falsifies,
    is_admissible,
    random_quasi_identity,
    sample_quasi_identities,
)
from natdual.algebra import AlgebraError, product
from natdual.duality.tsm import test_spaces_method
from natdual.formats import parse_quasi_identity
from natdual.free import free_algebra
from natdual.terms import eval_term, first_occurrence_order, term_depth

from conftest import UNARY_BINARY, algebras


@pytest.fixture(scope="module")
def F_DM():
    return free_algebra(corpus.load_algebra("D4"), 2)


def q(text, sig):
    return parse_quasi_identity(text, sig)


def test_reflexivity_is_valid_everywhere(D4):
    r = check_validity([D4], q("=> x0 = x0", D4.signature))
    assert r.valid and r.witness is None and r.stats.evaluations == 4


def test_least_witness_in_odometer_order(D4):
    r = check_validity([D4], q("=> x1 = x0", D4.signature))
    assert not r.valid
    # x1 occurs first, so it is the most significant digit
    assert r.witness.assignment == {1: 0, 0: 1}
    assert r.witness.labelled() == {"x0": "a", "x1": "0"}


def test_fixed_point_rule_separates_d4_from_its_test_algebra(D4, D42bar):
    rule = q("neg(x0) = x0 => x1 = x2", D4.signature)
    bad = check_validity([D4], rule)
    assert not bad.valid and falsifies(rule, D4, bad.witness.assignment)
    good = check_validity([D42bar], rule)
    assert good.valid and good.stats.evaluations == 1000


def test_witness_comes_from_the_first_failing_algebra(D4, D42bar):
    rule = q("neg(x0) = x0 => x1 = x2", D4.signature)
    r = check_validity([D42bar, D4], rule)
    assert r.witness.index == 1 and r.witness.algebra is D4


def naive(K, quasi):
    order = first_occurrence_order(quasi.terms)
    for i, A in enumerate(K):
        for vals in itertools.product(range(A.size), repeat=len(order)):
            asg = dict(zip(order, vals))
            if falsifies(quasi, A, asg):
                return i, asg
    return None


@settings(max_examples=80)
@given(st.lists(algebras(max_size=4), min_size=1, max_size=2), st.integers(0, 10**6))
def test_vectorised_check_matches_naive_enumeration(K, seed):
    quasi = random_quasi_identity(UNARY_BINARY, random.Random(seed), nvars=3, max_depth=2)
    r = check_validity(K, quasi)
    want = naive(K, quasi)
    if want is None:
        assert r.valid
    else:
        assert not r.valid
        assert (r.witness.index, dict(r.witness.assignment)) == want


def test_validity_passes_to_subalgebras_and_products(D4, D42bar):
    sig = D4.signature
    P = product([D4, D4])
    for quasi in sample_quasi_identities(sig, 40, seed=3):
        if check_validity([D4], quasi).valid:
            assert check_validity([D42bar], quasi).valid
            assert check_validity([P], quasi).valid


def test_admissible_rule_that_fails_in_the_generator(D4, F_DM):
    rule = q("neg(x0) = x0 => x1 = x2", D4.signature)
    r = is_admissible(D4, 2, rule, free=F_DM)
    assert r.valid and r.stats.evaluations == 168**3
    assert not check_validity([D4], rule).valid


def test_counterexample_substitution_refutes_in_the_generator(D4, F_DM):
    rule = q("meet(x0, x1) = x0 => x0 = x1", D4.signature)
    r = is_admissible(D4, 2, rule, via="free", free=F_DM)
    assert not r.valid and r.route == "free"
    sigma = counterexample_substitution(r, F_DM)
    inst = rule.substitute(sigma)
    points = list(itertools.product(range(4), repeat=2))
    # premises become identities of D4, the conclusion does not
    for p in inst.premises:
        assert all(eval_term(p.lhs, D4, pt) == eval_term(p.rhs, D4, pt) for pt in points)
    c = inst.conclusion
    assert any(eval_term(c.lhs, D4, pt) != eval_term(c.rhs, D4, pt) for pt in points)


def test_substitution_needs_a_witness_from_that_free_algebra(D4, D42bar, F_DM):
    with pytest.raises(AlgebraError):
        counterexample_substitution(check_validity([D4], q("=> x0 = x0", D4.signature)), F_DM)
    bad = check_validity([D42bar], q("=> x0 = x1", D4.signature))
    with pytest.raises(AlgebraError):
        counterexample_substitution(bad, F_DM)


def test_routes_agree_on_k2():
    c = corpus.case("k2")
    M, E = corpus.load_algebra(c.algebra), corpus.load_ego(c.ego)
    tests = test_spaces_method(M, E, c.s, hint=c.load_hint()).algebras
    F = free_algebra(M, c.s)
    for quasi in sample_quasi_identities(M.signature, 15, seed=1, nvars=2):
        a = is_admissible(M, 2, quasi, via="free", free=F)
        b = is_admissible(M, 2, quasi, via="test", test_set=tests)
        assert a.valid == b.valid and b.route == "test"


def test_route_errors(D4):
    rule = q("=> x0 = x0", D4.signature)
    with pytest.raises(AlgebraError):
        is_admissible(D4, 2, rule, via="test")
    with pytest.raises(AlgebraError):
        is_admissible(D4, 2, rule, via="nowhere")
    with pytest.raises(AlgebraError):
        check_validity([], rule)


def test_samples_are_reproducible_and_bounded(D4):
    a = sample_quasi_identities(D4.signature, 30, seed=9)
    assert a == sample_quasi_identities(D4.signature, 30, seed=9)
    assert a != sample_quasi_identities(D4.signature, 30, seed=10)
    for quasi in a:
        assert len(quasi.premises) <= 2 and quasi.nvars <= 3
        assert all(term_depth(t) <= 3 for t in quasi.terms)
