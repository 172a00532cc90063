"""Congruences in least-representative form, principal congruences, Con(A), quotients."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraError, FiniteAlgebra, Homomorphism


def _canonical(labels) -> tuple[int, ...]:
    first: dict = {}
    return tuple(first.setdefault(lab, i) for i, lab in enumerate(labels))


@dataclass(frozen=True, eq=False)
class Congruence:
    """``rep[i]`` is the least element of the block containing ``i``."""

    algebra: FiniteAlgebra
    rep: tuple[int, ...]

    def __eq__(self, other):
        if not isinstance(other, Congruence):
            return NotImplemented
        return self.rep == other.rep

    def __hash__(self):
        return hash(self.rep)

    def __le__(self, other: "Congruence") -> bool:
        return all(other.rep[i] == other.rep[r] for i, r in enumerate(self.rep))

    def __lt__(self, other: "Congruence") -> bool:
        return self != other and self <= other

    def __and__(self, other: "Congruence") -> "Congruence":
        return Congruence(self.algebra, _canonical(zip(self.rep, other.rep)))

    def __or__(self, other: "Congruence") -> "Congruence":
        uf = _UnionFind(len(self.rep))
        for i in range(len(self.rep)):
            uf.union(i, self.rep[i])
            uf.union(i, other.rep[i])
        return Congruence(self.algebra, uf.reps())

    def __repr__(self):
        return f"Congruence({self.blocks()})"

    def related(self, a: int, b: int) -> bool:
        return self.rep[a] == self.rep[b]

    def blocks(self) -> list[tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for i, r in enumerate(self.rep):
            out.setdefault(r, []).append(i)
        return [tuple(v) for _, v in sorted(out.items())]

    def block_count(self) -> int:
        return len(set(self.rep))

    def is_identity(self) -> bool:
        return all(r == i for i, r in enumerate(self.rep))

    def is_full(self) -> bool:
        return all(r == 0 for r in self.rep)


def identity_congruence(A: FiniteAlgebra) -> Congruence:
    return Congruence(A, tuple(range(A.size)))


def full_congruence(A: FiniteAlgebra) -> Congruence:
    return Congruence(A, (0,) * A.size)


def partition_congruence(A: FiniteAlgebra, labels) -> Congruence:
    """Congruence whose blocks are the level sets of ``labels``; checks compatibility."""
    theta = Congruence(A, _canonical(labels))
    if not is_compatible(theta):
        raise AlgebraError(f"partition {theta.blocks()} is not compatible with the operations")
    return theta


def kernel(h: Homomorphism) -> Congruence:
    return Congruence(h.source, _canonical(h.map))


def is_compatible(theta: Congruence) -> bool:
    A = theta.algebra
    rep = np.asarray(theta.rep, dtype=np.int64)
    for op, ar in A.signature:
        if ar == 0:
            continue
        t = A.tables[op].astype(np.int64)
        # compatible iff f(a) and f(rep a) agree modulo theta in every argument slot
        for pos in range(ar):
            moved = np.take(t, rep, axis=pos)
            if not np.array_equal(rep[t], rep[moved]):
                return False
    return True


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True

    def reps(self) -> tuple[int, ...]:
        return tuple(self.find(i) for i in range(len(self.parent)))


def _translations(A: FiniteAlgebra):
    """For each basic translation slot, a function x -> row of images as a 2-D lookup.

    Returns a list of arrays ``T`` with ``T[x]`` the vector of values of
    the translations obtained by fixing all but one argument.
    """
    out = []
    n = A.size
    for op, ar in A.signature:
        if ar == 0:
            continue
        t = A.tables[op]
        for pos in range(ar):
            moved = np.moveaxis(t, pos, 0).reshape(n, -1)
            out.append(np.ascontiguousarray(moved).tolist())
    return out


def generated_congruence(A: FiniteAlgebra, pairs) -> Congruence:
    """Least congruence containing all ``pairs``."""
    uf = _UnionFind(A.size)
    queue = []
    for a, b in pairs:
        if uf.union(a, b):
            queue.append((a, b))
    trans = A.__dict__.get("_cg_translations")
    if trans is None:
        trans = _translations(A)
        object.__setattr__(A, "_cg_translations", trans)
    while queue:
        a, b = queue.pop()
        for T in trans:
            ra, rb = T[a], T[b]
            for x, y in zip(ra, rb):
                if x != y and uf.union(x, y):
                    queue.append((x, y))
    return Congruence(A, uf.reps())


def principal_congruence(A: FiniteAlgebra, a: int, b: int) -> Congruence:
    if not (0 <= a < A.size and 0 <= b < A.size):
        raise AlgebraError("element out of range")
    return generated_congruence(A, [(a, b)])


def congruence_lattice(A: FiniteAlgebra) -> list[Congruence]:
    """All congruences of ``A``: joins of principal congruences, sorted by
    number of blocks (descending) then representative array."""
    principals = {}
    for a, b in itertools.combinations(range(A.size), 2):
        c = principal_congruence(A, a, b)
        principals.setdefault(c.rep, c)
    prin = list(principals.values())
    found = {identity_congruence(A).rep: identity_congruence(A)}
    found.update(principals)
    frontier = list(principals.values())
    while frontier:
        new = []
        for theta in frontier:
            for p in prin:
                j = theta | p
                if j.rep not in found:
                    found[j.rep] = j
                    new.append(j)
        frontier = new
    return sorted(found.values(), key=lambda c: (-c.block_count(), c.rep))


def quotient(A: FiniteAlgebra, theta: Congruence, name: str | None = None) -> tuple[FiniteAlgebra, Homomorphism]:
    """``A/theta`` with blocks numbered by increasing representative, and the projection."""
    if theta.algebra is not A and theta.algebra.size != A.size:
        raise AlgebraError("congruence belongs to a different algebra")
    if not is_compatible(Congruence(A, theta.rep)):
        raise AlgebraError("partition is not a congruence")
    reps = sorted(set(theta.rep))
    block_of = {r: i for i, r in enumerate(reps)}
    proj = np.array([block_of[r] for r in theta.rep], dtype=np.int64)
    rep_idx = np.array(reps, dtype=np.int64)
    tables = {}
    for op, ar in A.signature:
        sub = A.tables[op][np.ix_(*([rep_idx] * ar))] if ar else A.tables[op]
        tables[op] = proj[sub.astype(np.int64)]
    labels = None
    if A.labels is not None:
        labels = tuple(
            A.label(r) if sum(1 for x in theta.rep if x == r) == 1 else "[" + "".join(A.label(x) for x in range(A.size) if theta.rep[x] == r) + "]"
            for r in reps
        )
    Q = FiniteAlgebra(A.signature, len(reps), tables, labels, name)
    return Q, Homomorphism(A, Q, tuple(proj.tolist()))
