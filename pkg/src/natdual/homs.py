"""Homomorphism enumeration between finite algebras.

A homomorphism is fixed by its values on a generating set, so the search
branches only on generator images (in the greedy order of
:func:`generating_set`) and propagates along recorded derivations; every
other element's image is forced.  After each generator the partial map is
checked on the subuniverse generated so far.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np

from .algebra import FiniteAlgebra, Homomorphism, generating_set, require_same_signature

Mode = Literal["all", "injective", "surjective", "first"]


@dataclass
class _Stage:
    generator: int
    derivations: list[tuple[int, str, tuple[int, ...]]]
    members: np.ndarray


def _stages(A: FiniteAlgebra) -> tuple[list[tuple[int, str, tuple[int, ...]]], list[_Stage]]:
    cached = A.__dict__.get("_hom_stages")
    if cached is not None:
        return cached
    gens = generating_set(A)
    members: list[int] = []
    seen: set[int] = set()
    ops = [(op, ar) for op, ar in A.signature if ar > 0]

    def close(derivs):
        frontier = list(members)
        while frontier:
            new = []
            cur = list(members)
            fset = set(frontier)
            for op, ar in ops:
                for args in _tuples(cur, ar, fset):
                    y = A.apply(op, *args)
                    if y not in seen:
                        seen.add(y)
                        members.append(y)
                        new.append(y)
                        derivs.append((y, op, args))
            frontier = new

    base: list[tuple[int, str, tuple[int, ...]]] = []
    for op, ar in A.signature:
        if ar == 0:
            c = A.apply(op)
            if c not in seen:
                seen.add(c)
                members.append(c)
                base.append((c, op, ()))
    close(base)
    stages = []
    for g in gens:
        derivs: list = []
        if g not in seen:
            seen.add(g)
            members.append(g)
        close(derivs)
        stages.append(_Stage(g, derivs, np.array(sorted(members), dtype=np.int64)))
    object.__setattr__(A, "_hom_stages", (base, stages))
    return base, stages


def _tuples(cur, ar, fset):
    import itertools

    for args in itertools.product(cur, repeat=ar):
        if fset.intersection(args):
            yield args


def _consistent(A: FiniteAlgebra, B: FiniteAlgebra, h: np.ndarray, S: np.ndarray) -> bool:
    for op, ar in A.signature:
        if ar == 0:
            continue
        grid = np.ix_(*([S] * ar))
        lhs = h[A.tables[op][grid].astype(np.int64)]
        hs = h[S]
        rhs = B.tables[op][np.ix_(*([hs] * ar))]
        if not np.array_equal(lhs, rhs):
            return False
    return True


def iter_homomorphisms(A: FiniteAlgebra, B: FiniteAlgebra, mode: Mode = "all") -> Iterator[Homomorphism]:
    require_same_signature(A, B)
    base, stages = _stages(A)
    h = np.full(A.size, -1, dtype=np.int64)
    for x, op, args in base:
        h[x] = B.apply(op, *(int(h[a]) for a in args))
    if base and not _consistent(A, B, h, np.array(sorted(x for x, _, _ in base), dtype=np.int64)):
        return
    if mode == "injective" and len({int(h[x]) for x, _, _ in base}) != len(base):
        return

    def extend(k: int):
        if k == len(stages):
            yield h.copy()
            return
        st = stages[k]
        if h[st.generator] >= 0:
            choices = [int(h[st.generator])]
        else:
            choices = range(B.size)
        saved = h.copy()
        for v in choices:
            h[st.generator] = v
            ok = True
            for x, op, args in st.derivations:
                h[x] = B.apply(op, *(int(h[a]) for a in args))
            if mode == "injective":
                vals = h[st.members]
                if len(np.unique(vals)) != len(vals):
                    ok = False
            if ok and _consistent(A, B, h, st.members):
                yield from extend(k + 1)
            h[:] = saved

    for m in extend(0):
        if mode == "surjective" and len(np.unique(m)) != B.size:
            continue
        yield Homomorphism(A, B, tuple(m.tolist()))


def enumerate_homomorphisms(A: FiniteAlgebra, B: FiniteAlgebra, mode: Mode = "all") -> list[Homomorphism]:
    """Homomorphisms ``A -> B`` filtered by ``mode``, sorted by their value
    tables; ``first`` returns at most one."""
    if mode == "first":
        for hom in iter_homomorphisms(A, B, "all"):
            return [hom]
        return []
    return sorted(iter_homomorphisms(A, B, mode), key=lambda f: f.map)


def first_homomorphism(A: FiniteAlgebra, B: FiniteAlgebra, mode: Mode = "all") -> Homomorphism | None:
    for hom in iter_homomorphisms(A, B, mode):
        return hom
    return None


def endomorphisms(A: FiniteAlgebra) -> list[Homomorphism]:
    return enumerate_homomorphisms(A, A)


def _invariant(A: FiniteAlgebra):
    inv = []
    for op, ar in A.signature:
        t = A.tables[op]
        if ar == 0:
            continue
        if ar == 1:
            fixed = int((t == np.arange(A.size)).sum())
            inv.append((op, fixed, tuple(sorted(np.bincount(t, minlength=A.size).tolist()))))
        elif ar == 2:
            diag = np.diagonal(t)
            inv.append((op, int((diag == np.arange(A.size)).sum()), int((t == t.T).sum())))
    return tuple(inv)


def is_isomorphic(A: FiniteAlgebra, B: FiniteAlgebra) -> tuple[bool, Homomorphism | None]:
    """Whether ``A`` and ``B`` are isomorphic, with a witnessing bijection."""
    if A.signature != B.signature or A.size != B.size:
        return False, None
    if _invariant(A) != _invariant(B):
        return False, None
    hom = first_homomorphism(A, B, "injective")
    return (hom is not None), hom


def embeds(A: FiniteAlgebra, B: FiniteAlgebra) -> bool:
    if A.size > B.size:
        return False
    return first_homomorphism(A, B, "injective") is not None


def is_homomorphic_image(B: FiniteAlgebra, A: FiniteAlgebra) -> bool:
    """Whether ``B`` is a homomorphic image of ``A``."""
    if B.size > A.size:
        return False
    return first_homomorphism(A, B, "surjective") is not None
