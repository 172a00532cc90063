"""Terms, identities and quasi-identities, and their evaluation in finite algebras."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .algebra import AlgebraError, FiniteAlgebra, Signature


class TermError(AlgebraError):
    pass


@dataclass(frozen=True)
class Var:
    index: int

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Term", ...] = ()

    def __str__(self):
        if not self.args:
            return self.op
        return f"{self.op}({', '.join(str(a) for a in self.args)})"


Term = Union[Var, App]


def app(op: str, *args: Term) -> App:
    return App(op, tuple(args))


def variables(t: Term) -> set[int]:
    if isinstance(t, Var):
        return {t.index}
    out: set[int] = set()
    for a in t.args:
        out |= variables(a)
    return out


def first_occurrence_order(terms: Sequence[Term]) -> list[int]:
    seen: list[int] = []

    def walk(t):
        if isinstance(t, Var):
            if t.index not in seen:
                seen.append(t.index)
        else:
            for a in t.args:
                walk(a)

    for t in terms:
        walk(t)
    return seen


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def substitute(t: Term, sigma: Mapping[int, Term]) -> Term:
    if isinstance(t, Var):
        return sigma.get(t.index, t)
    return App(t.op, tuple(substitute(a, sigma) for a in t.args))


def check_term(t: Term, signature: Signature) -> None:
    if isinstance(t, Var):
        if t.index < 0:
            raise TermError(f"negative variable index {t.index}")
        return
    ar = signature.arity(t.op) if t.op in signature else None
    if ar is None:
        raise TermError(f"unknown operation symbol {t.op!r}")
    if ar != len(t.args):
        raise TermError(f"{t.op!r} has arity {ar} but is applied to {len(t.args)} arguments")
    for a in t.args:
        check_term(a, signature)


@dataclass(frozen=True)
class Identity:
    lhs: Term
    rhs: Term

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class QuasiIdentity:
    premises: tuple[Identity, ...]
    conclusion: Identity

    def __str__(self):
        return f"{', '.join(str(p) for p in self.premises)} => {self.conclusion}".lstrip()

    @property
    def terms(self) -> list[Term]:
        out = []
        for p in self.premises:
            out += [p.lhs, p.rhs]
        return out + [self.conclusion.lhs, self.conclusion.rhs]

    @property
    def nvars(self) -> int:
        vs = set()
        for t in self.terms:
            vs |= variables(t)
        return max(vs) + 1 if vs else 0

    def check(self, signature: Signature) -> None:
        for t in self.terms:
            check_term(t, signature)

    def substitute(self, sigma: Mapping[int, Term]) -> "QuasiIdentity":
        return QuasiIdentity(
            tuple(Identity(substitute(p.lhs, sigma), substitute(p.rhs, sigma)) for p in self.premises),
            Identity(substitute(self.conclusion.lhs, sigma), substitute(self.conclusion.rhs, sigma)),
        )


Assignment = Mapping[int, int]


def eval_term(t: Term, A: FiniteAlgebra, asg: Assignment | Sequence[int]) -> int:
    """Value of ``t`` in ``A`` with variable ``i`` sent to ``asg[i]``."""
    if isinstance(t, Var):
        try:
            v = asg[t.index]
        except (KeyError, IndexError):
            raise TermError(f"variable x{t.index} is unassigned") from None
        if not 0 <= v < A.size:
            raise TermError(f"x{t.index} assigned {v}, outside the universe")
        return v
    if t.op not in A.signature:
        raise TermError(f"unknown operation symbol {t.op!r}")
    ar, tab = A.flat[t.op]
    if ar != len(t.args):
        raise TermError(f"{t.op!r} has arity {ar} but is applied to {len(t.args)} arguments")
    idx = 0
    for a in t.args:
        idx = idx * A.size + eval_term(a, A, asg)
    return tab[idx]


def eval_term_vec(t: Term, A: FiniteAlgebra, values: Sequence[np.ndarray], cache: dict | None = None) -> np.ndarray:
    """Evaluate ``t`` on many assignments at once; ``values[i]`` holds the
    (broadcastable) values of variable ``i``. Shared subterms are memoized."""
    if cache is None:
        cache = {}
    if t in cache:
        return cache[t]
    if isinstance(t, Var):
        if t.index >= len(values):
            raise TermError(f"variable x{t.index} is unassigned")
        out = values[t.index]
    else:
        if t.op not in A.signature:
            raise TermError(f"unknown operation symbol {t.op!r}")
        tab = A.tables[t.op]
        if tab.ndim != len(t.args):
            raise TermError(f"{t.op!r} has arity {tab.ndim} but is applied to {len(t.args)} arguments")
        if not t.args:
            out = np.asarray(tab)
        else:
            args = [eval_term_vec(a, A, values, cache) for a in t.args]
            out = tab[tuple(args)]
    cache[t] = out
    return out
