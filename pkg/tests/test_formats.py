import itertools
import random

import numpy as np
import pytest

from natdual import corpus
from natdual.algebra import FiniteAlgebra, Signature
from natdual.admissibility import random_quasi_identity
from natdual.duality.structures import AlterEgo, FiniteStructure, check_compatibility
from natdual.formats import (
    FormatError,
    parse_algebra,
    parse_hint,
    parse_quasi_identities,
    parse_quasi_identity,
    parse_structure,
    parse_term,
    print_algebra,
    print_hint,
    print_quasi_identity,
    print_structure,
)
from natdual.terms import App, Var

DM_SIG = corpus.load_algebra("D4").signature


def same_algebra(A: FiniteAlgebra, B: FiniteAlgebra) -> bool:
    return (
        A.name == B.name
        and A.signature == B.signature
        and [A.label(i) for i in range(A.size)] == [B.label(i) for i in range(B.size)]
        and all(np.array_equal(A.tables[op], B.tables[op]) for op, _ in A.signature)
    )


def same_structure(X: FiniteStructure, Y: FiniteStructure) -> bool:
    return (
        X.size == Y.size
        and X.labels == Y.labels
        and X.ops.keys() == Y.ops.keys()
        and all(np.array_equal(X.ops[k], Y.ops[k]) for k in X.ops)
        and dict(X.partials) == dict(Y.partials)
        and dict(X.relations) == dict(Y.relations)
    )


@pytest.mark.parametrize("doc", corpus.documents())
def test_corpus_documents_round_trip(doc):
    text = corpus._read(doc)
    if doc.endswith(".alg"):
        A = parse_algebra(text)
        assert same_algebra(parse_algebra(print_algebra(A)), A)
    elif doc.endswith(".str"):
        E = parse_structure(text, corpus.load_algebra)
        again = parse_structure(print_structure(E), corpus.load_algebra)
        assert again.name == E.name and again.base is E.base
        assert same_structure(again.structure, E.structure)
    else:
        key = next(c for c in corpus.cases() if c.hint == doc)
        M = corpus.load_algebra(key.algebra)
        h = parse_hint(text, M)
        assert parse_hint(print_hint(h, M), M) == h


def test_corpus_alter_egos_are_compatible():
    for c in corpus.cases():
        ok, why = check_compatibility(corpus.load_ego(c.ego))
        assert ok, (c.ego, why)


def test_double_stone_order_has_one_cover():
    le = corpus.load_ego("dS~").structure.relations["le"][1]
    assert {(a, b) for a, b in le if a != b} == {(1, 2)}


def test_unary_relations_parse_as_relations():
    S = corpus.load_ego("K3~").structure
    assert S.relations["u01"] == (1, frozenset({(0,), (4,)}))
    assert S.relations["u0d1"] == (1, frozenset({(0,), (3,), (4,)}))


def test_double_stone_pseudocomplements():
    dS = corpus.load_algebra("dS")
    meet, join = dS.tables["meet"], dS.tables["join"]

    def leq(x, y):
        return meet[x, y] == x

    for x in range(4):
        # x* is the largest y with x meet y = 0, x+ the least y with x join y = 1
        below = [y for y in range(4) if meet[x, y] == 0]
        above = [y for y in range(4) if join[x, y] == 3]
        star, plus = int(dS.tables["star"][x]), int(dS.tables["plus"][x])
        assert star in below and all(leq(y, star) for y in below)
        assert plus in above and all(leq(plus, y) for y in above)


# fuzzed documents

LABELS = [c for c in "0123456789abcdefghijklmnopqrstuvw"]


def random_algebra_doc(rng: random.Random) -> FiniteAlgebra:
    n = rng.randint(1, 5)
    labels = rng.sample(LABELS, n)
    sig = [(f"f{i}", rng.choice([0, 1, 1, 2, 2, 3])) for i in range(rng.randint(0, 3))]
    tables = {op: np.array([rng.randrange(n) for _ in range(n**ar)]).reshape((n,) * ar) for op, ar in sig}
    return FiniteAlgebra(Signature.of(*sig), n, tables, tuple(labels), f"A{rng.randrange(1000)}")


def random_structure_doc(rng: random.Random) -> FiniteStructure:
    n = rng.randint(1, 5)
    labels = tuple(rng.sample(LABELS, n))
    ops = {f"g{i}": np.array([rng.randrange(n) for _ in range(n**k)]).reshape((n,) * k) for i, k in enumerate(rng.choices([1, 2], k=rng.randint(0, 2)))}
    partials = {}
    for i in range(rng.randint(0, 2)):
        k = rng.randint(1, 2)
        dom = [t for t in itertools.product(range(n), repeat=k) if rng.random() < 0.5]
        partials[f"p{i}"] = (k, {t: rng.randrange(n) for t in dom})
    relations = {}
    for i in range(rng.randint(0, 2)):
        k = rng.randint(1, 3)
        relations[f"r{i}"] = (k, frozenset(t for t in itertools.product(range(n), repeat=k) if rng.random() < 0.3))
    if rng.random() < 0.5:
        rank = [rng.randrange(3) for _ in range(n)]
        relations["le"] = (2, frozenset((a, b) for a in range(n) for b in range(n) if a == b or (rank[a] < rank[b] and (a + b) % 2 == 0)))
        # close to a partial order
        ts = set(relations["le"][1])
        while True:
            more = {(a, c) for a, b in ts for b2, c in ts if b == b2} - ts
            if not more:
                break
            ts |= more
        relations["le"] = (2, frozenset(ts))
    return FiniteStructure(n, ops, partials, relations, labels, None, f"X{rng.randrange(1000)}")


def test_fuzzed_documents_round_trip():
    rng = random.Random(20240611)
    sig = Signature.of(("neg", 1), ("meet", 2), ("join", 2), ("0", 0), ("1", 0))
    for k in range(200):
        kind = k % 3
        if kind == 0:
            A = random_algebra_doc(rng)
            text = print_algebra(A)
            assert same_algebra(parse_algebra(text), A)
            assert print_algebra(parse_algebra(text)) == text
        elif kind == 1:
            X = random_structure_doc(rng)
            text = print_structure(X)
            Y = parse_structure(text)
            assert same_structure(Y, X), text
            assert print_structure(Y) == text
        else:
            q = random_quasi_identity(sig, rng, nvars=rng.randint(1, 3), max_depth=rng.randint(0, 3))
            text = print_quasi_identity(q)
            assert parse_quasi_identity(text, sig) == q
            assert print_quasi_identity(parse_quasi_identity(text)) == text


def test_bare_set_parses():
    A = parse_algebra("algebra S\nelements p q r\n")
    assert A.size == 3 and len(A.signature) == 0


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("algebra A\nelements 0 1\nop f/1\n  0 -> 1\n", "missing row for 1"),
        ("algebra A\nelements 0 1\nop f/1\n  0 -> 1\n  0 -> 0\n  1 -> 1\n", "duplicate row"),
        ("algebra A\nelements 0 1\nop f/1\n  0 -> 2\n  1 -> 1\n", "2"),
        ("algebra A\nelements 0 1\nop f/1\n  0 -> 0\n  1 -> 1\nop f/2\n", "arity clash"),
        ("algebra A\nop f/1\n", "elements must come before"),
    ],
)
def test_algebra_errors(text, fragment):
    with pytest.raises(FormatError, match=fragment) as e:
        parse_algebra(text)
    assert e.value.line is not None or fragment == "elements must come before"


def test_error_carries_source_name():
    with pytest.raises(FormatError, match=r"^bad\.alg:3:"):
        parse_algebra("algebra A\nelements 0 1\nop f/1\n  0 -> 1\n", source="bad.alg")


def test_structure_errors():
    with pytest.raises(FormatError):
        parse_structure("structure X\nelements 0 1\nrelation r/2\n  0 2\n")
    with pytest.raises(FormatError):
        parse_structure("structure X\nelements 0 1\norder le\n  0 < 1\n  1 < 0\n")
    with pytest.raises(FormatError, match="unknown algebra"):
        parse_structure("alterego Y over nowhere\nelements 0 1\n", {})


def test_quasi_identity_examples():
    q = parse_quasi_identity("=> x0 = x0")
    assert q.premises == () and q.conclusion.lhs == q.conclusion.rhs == Var(0)
    q = parse_quasi_identity("neg(x0) = x0 => x1 = x2", DM_SIG)
    assert q.nvars == 3
    q = parse_quasi_identity("meet(x0, neg(x0)) = join(x1, neg(x1)) => x0 = x1", DM_SIG)
    assert parse_quasi_identity(print_quasi_identity(q), DM_SIG) == q


def test_infix_sugar_needs_parentheses():
    assert parse_term("(x0 meet neg(x1))", DM_SIG) == App("meet", (Var(0), App("neg", (Var(1),))))
    with pytest.raises(FormatError):
        parse_term("x0 meet x1", DM_SIG)


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("neg(x0, x1) = x0 => x0 = x1", "arity"),
        ("foo(x0) = x0 => x0 = x1", "unknown operation"),
        ("x0 = x1 -> x0 = x1", "=>"),
        ("x0 = x1 x0 => x0 = x1", "arrow"),
    ],
)
def test_quasi_identity_errors(text, fragment):
    with pytest.raises(FormatError, match=fragment):
        parse_quasi_identity(text, DM_SIG)


def test_quasi_identity_file_reports_line():
    with pytest.raises(FormatError, match=r"^2:"):
        parse_quasi_identities("=> x0 = x0\nneg(x0 = x0 => x0 = x0\n", DM_SIG)


def test_alter_ego_header_checks_labels():
    with pytest.raises(FormatError, match="differ"):
        parse_structure("alterego Z over D4\nelements 0 b a 1\n", corpus.load_algebra)
    E = parse_structure(corpus.text("D4~"), corpus.load_algebra)
    assert isinstance(E, AlterEgo)
