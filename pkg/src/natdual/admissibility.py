"""Validity and admissibility of quasi-identities.

A quasi-identity is admissible in ISP(M) when it holds in the free algebra
F_M(s); by the test-space theorem it is equivalent to check it in E(X).
Both routes reduce to :func:`check_validity`.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .algebra import AlgebraError, FiniteAlgebra, Signature, require_same_signature
from .free import DEFAULT_MEMORY_BUDGET, FreeAlgebra, free_algebra
from .terms import App, Identity, QuasiIdentity, Term, Var, eval_term, eval_term_vec, first_occurrence_order

CHUNK = 1 << 18


@dataclass(frozen=True)
class Witness:
    """An assignment (variable index -> element) in ``K[index]`` that
    satisfies every premise and falsifies the conclusion."""

    index: int
    algebra: FiniteAlgebra
    assignment: Mapping[int, int]

    def labelled(self) -> dict[str, str]:
        return {f"x{v}": self.algebra.label(a) for v, a in sorted(self.assignment.items())}


@dataclass
class CheckStats:
    evaluations: int = 0
    seconds: float = 0.0


@dataclass
class CheckReport:
    verdict: str
    witness: Witness | None = None
    stats: CheckStats = field(default_factory=CheckStats)
    route: str | None = None

    @property
    def valid(self) -> bool:
        return self.verdict == "valid"

    def __bool__(self):
        return self.valid


def _holds_naive(q: QuasiIdentity, A: FiniteAlgebra, asg: Mapping[int, int]) -> bool:
    if all(eval_term(p.lhs, A, asg) == eval_term(p.rhs, A, asg) for p in q.premises):
        return eval_term(q.conclusion.lhs, A, asg) == eval_term(q.conclusion.rhs, A, asg)
    return True


def falsifies(q: QuasiIdentity, A: FiniteAlgebra, assignment: Mapping[int, int]) -> bool:
    """Term-by-term re-evaluation: premises hold and the conclusion fails."""
    return not _holds_naive(q, A, assignment)


def _equal(ident: Identity, A: FiniteAlgebra, values: list[np.ndarray], m: int) -> np.ndarray:
    cache: dict = {}
    lhs = np.broadcast_to(eval_term_vec(ident.lhs, A, values, cache), (m,))
    rhs = np.broadcast_to(eval_term_vec(ident.rhs, A, values, cache), (m,))
    return lhs == rhs


def _first_failure(q: QuasiIdentity, A: FiniteAlgebra, order: list[int], nvars: int, stats: CheckStats) -> dict[int, int] | None:
    n, k = A.size, len(order)
    total = n**k
    weights = [n ** (k - 1 - p) for p in range(k)]
    for lo in range(0, total, CHUNK):
        hi = min(total, lo + CHUNK)
        idx = np.arange(lo, hi, dtype=np.int64)
        stats.evaluations += hi - lo
        alive = idx
        for ident in (*q.premises, None):
            values = [np.zeros(len(alive), dtype=np.intp) for _ in range(nvars)]
            for p, v in enumerate(order):
                values[v] = ((alive // weights[p]) % n).astype(np.intp)
            if ident is None:
                bad = ~_equal(q.conclusion, A, values, len(alive))
                if bad.any():
                    first = int(alive[np.argmax(bad)])
                    return {v: (first // weights[p]) % n for p, v in enumerate(order)}
                break
            alive = alive[_equal(ident, A, values, len(alive))]
            if not len(alive):
                break
    return None


def check_validity(K: Sequence[FiniteAlgebra], q: QuasiIdentity) -> CheckReport:
    """Whether ``q`` holds in every algebra of ``K``.

    Assignments run as an odometer over the variables in order of first
    occurrence (the first one most significant), premises filtering the
    candidates before the conclusion is evaluated.  The reported witness is
    the least one in that order, in the first algebra that has one.
    """
    if not K:
        raise AlgebraError("empty class of algebras")
    require_same_signature(*K)
    q.check(K[0].signature)
    t0 = time.perf_counter()
    stats = CheckStats()
    order = first_occurrence_order(q.terms)
    nvars = max(order) + 1 if order else 0
    for i, A in enumerate(K):
        asg = _first_failure(q, A, order, nvars, stats)
        if asg is not None:
            stats.seconds = time.perf_counter() - t0
            return CheckReport("invalid", Witness(i, A, asg), stats)
    stats.seconds = time.perf_counter() - t0
    return CheckReport("valid", None, stats)


def is_admissible(
    M: FiniteAlgebra,
    s: int,
    q: QuasiIdentity,
    via: str = "free",
    test_set: Sequence[FiniteAlgebra] | None = None,
    free: FreeAlgebra | None = None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> CheckReport:
    """Validity of ``q`` in F_M(s) (``via="free"``) or in the test algebras
    (``via="test"``), which generate the same quasivariety."""
    q.check(M.signature)
    if via == "free":
        F = free if free is not None else free_algebra(M, s, memory_budget=memory_budget)
        if F.base is not M and F.base != M:
            raise AlgebraError("free algebra was built over a different algebra")
        report = check_validity([F.algebra], q)
    elif via == "test":
        if not test_set:
            raise AlgebraError("via='test' needs a non-empty test set")
        report = check_validity(list(test_set), q)
    else:
        raise AlgebraError(f"unknown route {via!r}; use 'free' or 'test'")
    report.route = via
    return report


def counterexample_substitution(report: CheckReport, F: FreeAlgebra) -> dict[int, Term]:
    """Turn a witness found in F_M(s) into a substitution: each variable is
    sent to a term in x0..x{s-1} representing its value."""
    if report.valid or report.witness is None:
        raise AlgebraError("a valid report has no counterexample")
    if not isinstance(F, FreeAlgebra) or report.witness.algebra is not F.algebra:
        raise AlgebraError("the witness does not live in this free algebra")
    return {v: F.term(a) for v, a in sorted(report.witness.assignment.items())}


def random_term(signature: Signature, rng: random.Random, nvars: int, depth: int) -> Term:
    """Uniform choice of symbol at each node; leaves are variables or constants."""
    constants = [op for op, ar in signature if ar == 0]
    ops = [(op, ar) for op, ar in signature if ar > 0]
    if depth == 0 or not ops or rng.random() < 0.3:
        leaves = [Var(i) for i in range(nvars)] + [App(c) for c in constants]
        return rng.choice(leaves)
    op, ar = rng.choice(ops)
    return App(op, tuple(random_term(signature, rng, nvars, depth - 1) for _ in range(ar)))


def random_quasi_identity(signature: Signature, rng: random.Random, nvars: int = 3, max_depth: int = 3, max_premises: int = 2) -> QuasiIdentity:
    """Terms of depth at most ``max_depth`` over variables x0..x{nvars-1},
    with 0 to ``max_premises`` premises."""
    def ident():
        return Identity(random_term(signature, rng, nvars, max_depth), random_term(signature, rng, nvars, max_depth))

    premises = tuple(ident() for _ in range(rng.randint(0, max_premises)))
    return QuasiIdentity(premises, ident())


def sample_quasi_identities(signature: Signature, count: int, seed: int = 0, nvars: int = 3, max_depth: int = 3, max_premises: int = 2) -> list[QuasiIdentity]:
    """A reproducible sample; the same seed always gives the same list."""
    rng = random.Random(seed)
    return [random_quasi_identity(signature, rng, nvars, max_depth, max_premises) for _ in range(count)]
