"""Finite algebras stored as operation tables over the universe {0..n-1}."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np


class AlgebraError(ValueError):
    pass


class SignatureMismatch(AlgebraError):
    pass


@dataclass(frozen=True)
class Signature:
    ops: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.ops]
        if len(set(names)) != len(names):
            raise AlgebraError(f"duplicate operation names in {names}")
        for name, ar in self.ops:
            if ar < 0:
                raise AlgebraError(f"negative arity for {name}")

    @classmethod
    def of(cls, *ops: tuple[str, int]) -> "Signature":
        return cls(tuple((str(n), int(a)) for n, a in ops))

    @cached_property
    def arities(self) -> dict[str, int]:
        return dict(self.ops)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.ops)

    def arity(self, name: str) -> int:
        try:
            return self.arities[name]
        except KeyError:
            raise AlgebraError(f"unknown operation symbol {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.arities

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)


def _index_dtype(n: int):
    if n <= 255:
        return np.uint8
    if n <= 65535:
        return np.uint16
    return np.int32


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, order="C")  # ascontiguousarray would promote 0-d tables to 1-d
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    """An algebra on {0..size-1}; ``tables[name]`` has shape ``(size,) * arity``.

    Tables are row-major numpy arrays and are made read-only on construction.
    ``labels`` are display names for elements (optional).
    """

    signature: Signature
    size: int
    tables: Mapping[str, np.ndarray]
    labels: tuple[str, ...] | None = None
    name: str | None = None

    def __post_init__(self):
        n = self.size
        if n < 1:
            raise AlgebraError("an algebra needs a non-empty universe")
        fixed = {}
        for op, ar in self.signature:
            if op not in self.tables:
                raise AlgebraError(f"missing table for operation {op!r}")
            t = np.asarray(self.tables[op])
            if t.shape != (n,) * ar:
                raise AlgebraError(f"table of {op!r} has shape {t.shape}, expected {(n,) * ar}")
            if t.size and (t.min() < 0 or t.max() >= n):
                raise AlgebraError(f"table of {op!r} has entries outside 0..{n - 1}")
            fixed[op] = _freeze(t.astype(_index_dtype(n), copy=False))
        extra = set(self.tables) - set(self.signature.names)
        if extra:
            raise AlgebraError(f"tables for undeclared operations: {sorted(extra)}")
        object.__setattr__(self, "tables", fixed)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != n or len(set(labels)) != n:
                raise AlgebraError("labels must be distinct, one per element")
            object.__setattr__(self, "labels", labels)

    # -- identity -----------------------------------------------------------

    def same_tables(self, other: "FiniteAlgebra") -> bool:
        return (
            self.signature == other.signature
            and self.size == other.size
            and all(np.array_equal(self.tables[o], other.tables[o]) for o in self.signature.names)
        )

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return self.same_tables(other) and self.labels == other.labels and self.name == other.name

    @cached_property
    def _hash(self) -> int:
        parts = [self.signature, self.size, self.labels, self.name]
        parts += [self.tables[o].tobytes() for o in self.signature.names]
        return hash(tuple(parts))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        nm = self.name or "algebra"
        return f"<FiniteAlgebra {nm} size={self.size} ops={list(self.signature.names)}>"

    # -- access -------------------------------------------------------------

    @cached_property
    def flat(self) -> dict[str, tuple[int, tuple[int, ...]]]:
        """Per operation, ``(arity, row-major table as a Python tuple)``."""
        return {op: (ar, tuple(self.tables[op].ravel().tolist())) for op, ar in self.signature}

    def apply(self, op: str, *args: int) -> int:
        ar, tab = self.flat[op]
        if len(args) != ar:
            raise AlgebraError(f"{op!r} takes {ar} arguments, got {len(args)}")
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return tab[idx]

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def element(self, label: str | int) -> int:
        if isinstance(label, int):
            if not 0 <= label < self.size:
                raise AlgebraError(f"element {label} out of range")
            return label
        if self.labels is not None and label in self.labels:
            return self.labels.index(label)
        raise AlgebraError(f"unknown element label {label!r}")

    @property
    def universe(self) -> range:
        return range(self.size)

    @cached_property
    def constants(self) -> tuple[int, ...]:
        return tuple(sorted({int(self.tables[o]) for o, ar in self.signature if ar == 0}))

    def renamed(self, name: str | None) -> "FiniteAlgebra":
        return FiniteAlgebra(self.signature, self.size, self.tables, self.labels, name)

    def relabeled(self, labels: Sequence[str] | None) -> "FiniteAlgebra":
        return FiniteAlgebra(self.signature, self.size, self.tables, tuple(labels) if labels else None, self.name)

    def is_trivial(self) -> bool:
        return self.size == 1


def make_algebra(
    signature: Signature | Iterable[tuple[str, int]],
    size: int,
    ops: Mapping[str, object],
    labels: Sequence[str] | None = None,
    name: str | None = None,
) -> FiniteAlgebra:
    """Build an algebra from nested lists, callables or numpy arrays."""
    sig = signature if isinstance(signature, Signature) else Signature.of(*signature)
    tables = {}
    for op, ar in sig:
        spec = ops[op]
        if callable(spec):
            arr = np.empty((size,) * ar, dtype=np.int64)
            for args in itertools.product(range(size), repeat=ar):
                arr[args] = spec(*args)
        else:
            arr = np.asarray(spec, dtype=np.int64)
        tables[op] = arr
    return FiniteAlgebra(sig, size, tables, tuple(labels) if labels is not None else None, name)


def trivial_algebra(signature: Signature, name: str | None = None) -> FiniteAlgebra:
    return FiniteAlgebra(signature, 1, {op: np.zeros((1,) * ar, dtype=np.uint8) for op, ar in signature}, None, name)


def require_same_signature(*algebras: FiniteAlgebra) -> Signature:
    sig = algebras[0].signature
    for a in algebras[1:]:
        if a.signature != sig:
            raise SignatureMismatch(f"signature mismatch: {sig.ops} vs {a.signature.ops}")
    return sig


@dataclass(frozen=True, eq=False)
class Homomorphism:
    source: FiniteAlgebra
    target: FiniteAlgebra
    map: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.map[x]

    def __eq__(self, other):
        if not isinstance(other, Homomorphism):
            return NotImplemented
        return self.map == other.map and self.source == other.source and self.target == other.target

    def __hash__(self):
        return hash(self.map)

    def is_injective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    def is_surjective(self) -> bool:
        return len(set(self.map)) == self.target.size

    def image(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.map)))

    def compose(self, inner: "Homomorphism") -> "Homomorphism":
        """``self after inner``."""
        return Homomorphism(inner.source, self.target, tuple(self.map[x] for x in inner.map))

    def kernel(self) -> tuple[int, ...]:
        first: dict[int, int] = {}
        return tuple(first.setdefault(v, i) for i, v in enumerate(self.map))


def preserves_operations(A: FiniteAlgebra, B: FiniteAlgebra, mapping: Sequence[int]) -> bool:
    """Exhaustive check that ``mapping`` commutes with every table."""
    h = np.asarray(mapping, dtype=np.int64)
    if h.shape != (A.size,):
        return False
    for op, ar in A.signature:
        ta = A.tables[op].astype(np.int64)
        tb = B.tables[op]
        lhs = h[ta]
        rhs = tb[np.ix_(*([h] * ar))] if ar else tb
        if not np.array_equal(lhs, rhs):
            return False
    return True


def product(algebras: Sequence[FiniteAlgebra], name: str | None = None) -> FiniteAlgebra:
    """Direct product; element ``i`` is the lexicographically ``i``-th tuple."""
    if not algebras:
        raise AlgebraError("product of an empty sequence")
    sig = require_same_signature(*algebras)
    sizes = [a.size for a in algebras]
    n = int(np.prod(sizes))
    coords = np.array(list(itertools.product(*[range(k) for k in sizes])), dtype=np.int64).reshape(n, len(sizes))
    radix = np.array([int(np.prod(sizes[j + 1:])) for j in range(len(sizes))], dtype=np.int64)
    tables = {}
    for op, ar in sig:
        if ar == 0:
            tables[op] = np.array(sum(int(a.tables[op]) * r for a, r in zip(algebras, radix)))
            continue
        out = np.zeros((n,) * ar, dtype=np.int64)
        grids = np.meshgrid(*([np.arange(n)] * ar), indexing="ij")
        for j, a in enumerate(algebras):
            args = tuple(coords[g, j] for g in grids)
            out += a.tables[op].astype(np.int64)[args] * radix[j]
        tables[op] = out
    labels = None
    if all(a.labels is not None for a in algebras):
        labels = tuple("".join(a.label(c) for a, c in zip(algebras, row)) if all(len(a.label(c)) == 1 for a, c in zip(algebras, row))
                       else "(" + ",".join(a.label(c) for a, c in zip(algebras, row)) + ")" for row in coords.tolist())
    return FiniteAlgebra(sig, n, tables, labels, name)


def subalgebra_closure(A: FiniteAlgebra, gens: Iterable[int], limit: int | None = None) -> tuple[int, ...] | None:
    """Least subuniverse containing ``gens`` (and the constants), sorted.

    With ``limit`` set, returns None as soon as the closure exceeds that size.
    """
    members = set()
    for g in gens:
        if not 0 <= g < A.size:
            raise AlgebraError(f"element {g} out of range")
        members.add(int(g))
    members.update(A.constants)
    if limit is not None and len(members) > limit:
        return None
    ops = [(ar, tab) for ar, tab in A.flat.values() if ar > 0]
    n = A.size
    frontier = list(members)
    while frontier:
        cur = sorted(members)
        new: list[int] = []
        fset = set(frontier)
        for ar, tab in ops:
            if ar == 1:
                for x in frontier:
                    y = tab[x]
                    if y not in members:
                        members.add(y)
                        new.append(y)
            elif ar == 2:
                for x in frontier:
                    row = x * n
                    for z in cur:
                        for y in (tab[row + z], tab[z * n + x]):
                            if y not in members:
                                members.add(y)
                                new.append(y)
            else:
                for args in itertools.product(cur, repeat=ar):
                    if not fset.intersection(args):
                        continue
                    idx = 0
                    for a in args:
                        idx = idx * n + a
                    y = tab[idx]
                    if y not in members:
                        members.add(y)
                        new.append(y)
            if limit is not None and len(members) > limit:
                return None
        frontier = new
    return tuple(sorted(members))


def induced_subalgebra(A: FiniteAlgebra, subuniverse: Sequence[int], name: str | None = None) -> tuple[FiniteAlgebra, Homomorphism]:
    """The subalgebra on ``subuniverse`` (renumbered in sorted order) and its inclusion."""
    elems = sorted(set(int(x) for x in subuniverse))
    pos = {x: i for i, x in enumerate(elems)}
    idx = np.array(elems, dtype=np.int64)
    remap = np.full(A.size, -1, dtype=np.int64)
    remap[idx] = np.arange(len(elems))
    tables = {}
    for op, ar in A.signature:
        sub = A.tables[op][np.ix_(*([idx] * ar))] if ar else A.tables[op]
        mapped = remap[sub.astype(np.int64)]
        if (mapped < 0).any():
            raise AlgebraError(f"{subuniverse} is not closed under {op!r}")
        tables[op] = mapped
    labels = tuple(A.label(x) for x in elems) if A.labels is not None else None
    B = FiniteAlgebra(A.signature, len(elems), tables, labels, name)
    return B, Homomorphism(B, A, tuple(elems))


def generating_set(A: FiniteAlgebra) -> tuple[int, ...]:
    """A small generating set found greedily: repeatedly add the element
    whose closure with the current set is largest."""
    current: tuple[int, ...] = ()
    closed = set(subalgebra_closure(A, ()))
    while len(closed) < A.size:
        best, best_size = None, -1
        for x in range(A.size):
            if x in closed:
                continue
            size = len(subalgebra_closure(A, current + (x,)))
            if size > best_size:
                best, best_size = x, size
                if size == A.size:
                    break
        current = current + (best,)
        closed = set(subalgebra_closure(A, current))
    return current


def minimal_generator_count(A: FiniteAlgebra) -> int:
    """Least ``k`` such that some ``k`` elements generate ``A``."""
    if len(subalgebra_closure(A, ())) == A.size:
        return 0
    for k in range(1, A.size + 1):
        for combo in itertools.combinations(range(A.size), k):
            if len(subalgebra_closure(A, combo)) == A.size:
                return k
    return A.size


def all_subuniverses(A: FiniteAlgebra) -> list[tuple[int, ...]]:
    """Every non-empty subuniverse, by closing upward from singletons."""
    seen: set[tuple[int, ...]] = set()
    base = subalgebra_closure(A, ())
    todo = [base] if base else [subalgebra_closure(A, (x,)) for x in range(A.size)]
    while todo:
        S = todo.pop()
        if S in seen:
            continue
        seen.add(S)
        for x in range(A.size):
            if x not in S:
                T = subalgebra_closure(A, S + (x,))
                if T not in seen:
                    todo.append(T)
    return sorted(seen, key=lambda s: (len(s), s))
