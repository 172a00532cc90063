import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from natdual import corpus
from natdual.algebra import FiniteAlgebra, Signature

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[str, str] = {}


def pytest_addoption(parser):
    parser.addoption("--big", action="store_true", help="also build the free algebras with over a million elements")


def pytest_configure(config):
    config.addinivalue_line("markers", "big: needs --big")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--big"):
        return
    skip = pytest.mark.skip(reason="needs --big")
    for item in items:
        if "big" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


UNARY_BINARY = Signature.of(("f", 1), ("m", 2))


@st.composite
def algebras(draw, max_size=4, signature=UNARY_BINARY, min_size=1):
    n = draw(st.integers(min_size, max_size))
    tables = {}
    for op, ar in signature:
        cells = draw(st.lists(st.integers(0, n - 1), min_size=n**ar, max_size=n**ar))
        tables[op] = np.array(cells, dtype=np.int64).reshape((n,) * ar)
    return FiniteAlgebra(signature, n, tables)


def random_algebra(rng: np.random.Generator, n: int, signature=UNARY_BINARY) -> FiniteAlgebra:
    return FiniteAlgebra(signature, n, {op: rng.integers(0, n, size=(n,) * ar) for op, ar in signature})


def partitions(n: int):
    """All set partitions of range(n) as block-label tuples (restricted growth strings)."""
    def grow(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from grow(prefix + [b], max(top, b))

    yield from grow([0], 0) if n else iter([()])


def compatible(A: FiniteAlgebra, labels) -> bool:
    for op, ar in A.signature:
        t = A.tables[op]
        for xs in itertools.product(range(A.size), repeat=ar):
            for ys in itertools.product(range(A.size), repeat=ar):
                if all(labels[x] == labels[y] for x, y in zip(xs, ys)) and labels[t[xs]] != labels[t[ys]]:
                    return False
    return True


def brute_homs(A: FiniteAlgebra, B: FiniteAlgebra) -> list[tuple[int, ...]]:
    out = []
    for m in itertools.product(range(B.size), repeat=A.size):
        ok = True
        for op, ar in A.signature:
            ta, tb = A.tables[op], B.tables[op]
            for xs in itertools.product(range(A.size), repeat=ar):
                if m[ta[xs]] != tb[tuple(m[x] for x in xs)]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(m)
    return out


@pytest.fixture(scope="session")
def D4():
    return corpus.load_algebra("D4")


@pytest.fixture(scope="session")
def D4ego():
    return corpus.load_ego("D4~")


@pytest.fixture(scope="session")
def D42bar():
    return corpus.load_algebra("D42bar")
