"""Finite discrete structures with total operations, partial operations and
relations, alter egos, and structure-preserving maps between them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Literal, Mapping, Sequence

import numpy as np

from ..algebra import AlgebraError, FiniteAlgebra

Mode = Literal["all", "surjective", "embedding", "first"]


class StructureError(AlgebraError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    """Universe ``{0..n-1}``.

    ``ops`` maps a name to a numpy table of shape ``(n,)*k``; ``partials``
    maps a name to ``(k, {argument tuple: value})``; ``relations`` maps a
    name to ``(k, frozenset of tuples)``.  ``points`` optionally records,
    for a structure living inside a power of an alter ego, the tuple over
    the base algebra that each point stands for.
    """

    size: int
    ops: Mapping[str, np.ndarray] = field(default_factory=dict)
    partials: Mapping[str, tuple[int, Mapping[tuple[int, ...], int]]] = field(default_factory=dict)
    relations: Mapping[str, tuple[int, frozenset]] = field(default_factory=dict)
    labels: tuple[str, ...] | None = None
    points: tuple[tuple[int, ...], ...] | None = None
    name: str | None = None

    def __post_init__(self):
        n = self.size
        if n < 1:
            raise StructureError("structures are non-empty")
        ops = {}
        for op, t in self.ops.items():
            arr = np.asarray(t, dtype=np.int64)
            if arr.shape != (n,) * arr.ndim or arr.ndim == 0:
                raise StructureError(f"operation {op!r} has table shape {arr.shape}")
            if ((arr < 0) | (arr >= n)).any():
                raise StructureError(f"operation {op!r} leaves the universe")
            arr.flags.writeable = False
            ops[op] = arr
        object.__setattr__(self, "ops", ops)
        parts = {}
        for op, (k, graph) in self.partials.items():
            g = {}
            for args, v in graph.items():
                args = tuple(int(a) for a in args)
                if len(args) != k or not all(0 <= a < n for a in args) or not 0 <= v < n:
                    raise StructureError(f"partial operation {op!r} has a bad entry {args} -> {v}")
                g[args] = int(v)
            parts[op] = (k, g)
        object.__setattr__(self, "partials", parts)
        rels = {}
        for r, (k, tuples) in self.relations.items():
            ts = frozenset(tuple(int(a) for a in t) for t in tuples)
            for t in ts:
                if len(t) != k or not all(0 <= a < n for a in t):
                    raise StructureError(f"relation {r!r} has a bad tuple {t}")
            rels[r] = (k, ts)
        object.__setattr__(self, "relations", rels)
        if self.labels is not None and len(self.labels) != n:
            raise StructureError("wrong number of labels")

    @property
    def signature(self) -> tuple:
        """Names and arities of the three kinds of symbols; morphisms need equal signatures."""
        return (
            tuple(sorted((op, t.ndim) for op, t in self.ops.items())),
            tuple(sorted((op, k) for op, (k, _) in self.partials.items())),
            tuple(sorted((r, k) for r, (k, _) in self.relations.items())),
        )

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def point(self, label: str) -> int:
        if self.labels is not None and label in self.labels:
            return self.labels.index(label)
        raise StructureError(f"no point labelled {label!r}")

    def __eq__(self, other):
        if not isinstance(other, FiniteStructure):
            return NotImplemented
        return (
            self.size == other.size
            and self.ops.keys() == other.ops.keys()
            and all(np.array_equal(self.ops[k], other.ops[k]) for k in self.ops)
            and self.partials == other.partials
            and self.relations == other.relations
        )

    def __hash__(self):
        return hash((self.size, self.signature, tuple(sorted((r, len(t)) for r, (_, t) in self.relations.items()))))

    def __repr__(self):
        return f"FiniteStructure({self.name or ''}, size={self.size})"

    def relation_matrix(self, r: str) -> np.ndarray:
        k, ts = self.relations[r]
        if k != 2:
            raise StructureError(f"{r!r} is not binary")
        m = np.zeros((self.size, self.size), dtype=bool)
        for a, b in ts:
            m[a, b] = True
        return m


@dataclass(frozen=True, eq=False)
class AlterEgo:
    """A structure on the universe of ``base`` meant to dualise it."""

    base: FiniteAlgebra
    structure: FiniteStructure
    name: str | None = None

    def __post_init__(self):
        if self.structure.size != self.base.size:
            raise StructureError("alter ego and algebra have different universes")

    @property
    def size(self) -> int:
        return self.base.size


@dataclass(frozen=True)
class Violation:
    kind: str
    symbol: str
    detail: str

    def __str__(self):
        return f"{self.kind} {self.symbol!r}: {self.detail}"


def check_compatibility(ego: AlterEgo) -> tuple[bool, Violation | None]:
    """Total operations must be homomorphisms ``M^k -> M``, partial
    operations homomorphisms from a subalgebra of ``M^k``, relations
    subuniverses of ``M^k``.  Returns the first violation found."""
    M, X = ego.base, ego.structure
    for op, table in X.ops.items():
        k = table.ndim
        graph = {args: int(table[args]) for args in itertools.product(range(M.size), repeat=k)}
        v = _check_graph(M, op, k, graph, "operation")
        if v:
            return False, v
    for op, (k, graph) in X.partials.items():
        v = _check_graph(M, op, k, graph, "partial operation")
        if v:
            return False, v
    for r, (k, tuples) in X.relations.items():
        v = _check_closed(M, tuples, k)
        if v:
            return False, Violation("relation", r, v)
    return True, None


def _check_closed(M: FiniteAlgebra, tuples, k: int) -> str | None:
    ts = set(tuples)
    for op, ar in M.signature:
        if ar == 0:
            c = M.apply(op)
            if (c,) * k not in ts:
                return f"does not contain the constant {op} ({M.label(c)})"
            continue
        for rows in itertools.product(sorted(ts), repeat=ar):
            out = tuple(M.apply(op, *(row[j] for row in rows)) for j in range(k))
            if out not in ts:
                shown = ", ".join("".join(M.label(x) for x in row) for row in rows)
                return f"not closed under {op}: {op}({shown}) = {''.join(M.label(x) for x in out)}"
    return None


def _check_graph(M: FiniteAlgebra, op: str, k: int, graph: Mapping, kind: str) -> Violation | None:
    dom = set(graph)
    msg = _check_closed(M, dom, k)
    if msg:
        return Violation(kind, op, "domain " + msg)
    msg = _check_closed(M, {tuple(a) + (v,) for a, v in graph.items()}, k + 1)
    if msg:
        return Violation(kind, op, "not a homomorphism: graph " + msg)
    return None


def lifted_structure(ego: AlterEgo, rows: np.ndarray, labels: Sequence[str] | None = None, name: str | None = None, keep_points: bool = True) -> FiniteStructure:
    """Structure on the given rows of ``M^L`` with everything lifted pointwise.

    Row ``i`` is point ``i``.  Total operations must map rows to rows.  A
    tuple of rows lies in a relation (or a partial domain) iff it does in
    every coordinate.
    """
    X = ego.structure
    rows = np.ascontiguousarray(np.asarray(rows, dtype=np.int64))
    N, L = rows.shape
    lookup = {r.tobytes(): i for i, r in enumerate(rows)}
    if len(lookup) != N:
        raise StructureError("rows are not distinct")

    def ids(vals: np.ndarray) -> np.ndarray:
        out = np.empty(len(vals), dtype=np.int64)
        for i, v in enumerate(np.ascontiguousarray(vals, dtype=np.int64)):
            j = lookup.get(v.tobytes())
            if j is None:
                raise StructureError("rows are not closed under the total operations")
            out[i] = j
        return out

    ops = {}
    for op, table in X.ops.items():
        k = table.ndim
        grid = list(itertools.product(range(N), repeat=k))
        vals = table[tuple(rows[[g[j] for g in grid]] for j in range(k))]
        ops[op] = ids(vals).reshape((N,) * k)
    partials = {}
    for op, (k, graph) in X.partials.items():
        dom = np.zeros((ego.size,) * k, dtype=bool)
        val = np.zeros((ego.size,) * k, dtype=np.int64)
        for a, v in graph.items():
            dom[a] = True
            val[a] = v
        g = {}
        for tup, _ in _lifted_tuples(dom, rows, k):
            if not tup:
                continue
            vals = val[tuple(rows[list(t)] for t in zip(*tup))]
            for t, v in zip(tup, ids(vals)):
                g[t] = int(v)
        partials[op] = (k, g)
    relations = {}
    for r, (k, tuples) in X.relations.items():
        mem = np.zeros((ego.size,) * k, dtype=bool)
        for t in tuples:
            mem[t] = True
        relations[r] = (k, frozenset(t for tup, _ in _lifted_tuples(mem, rows, k) for t in tup))
    pts = tuple(tuple(int(v) for v in r) for r in rows) if keep_points else None
    if labels is None and ego.base.labels is not None and L <= 4:
        labels = tuple("".join(ego.base.label(v) for v in r) for r in rows.tolist())
    return FiniteStructure(N, ops, partials, relations, tuple(labels) if labels is not None else None, pts, name)


def _lifted_tuples(mem: np.ndarray, rows: np.ndarray, k: int, chunk: int = 1 << 22):
    """Yield ``(tuples, None)`` batches of point tuples whose rows lie in
    ``mem`` coordinatewise."""
    N, L = rows.shape
    if k == 1:
        ok = mem[rows].all(axis=1)
        yield [(int(i),) for i in np.nonzero(ok)[0]], None
        return
    if k == 2:
        step = max(1, chunk // max(1, N * L))
        for s in range(0, N, step):
            a = rows[s : s + step]
            ok = mem[a[:, None, :], rows[None, :, :]].all(axis=2)
            ii, jj = np.nonzero(ok)
            yield [(int(i) + s, int(j)) for i, j in zip(ii, jj)], None
        return
    out = []
    for tup in itertools.product(range(N), repeat=k):
        if mem[tuple(rows[t] for t in tup)].all():
            out.append(tup)
    yield out, None


def power_structure(ego: AlterEgo, s: int) -> FiniteStructure:
    """``ego^s`` with points the tuples of ``M^s`` in lexicographic order."""
    if s < 1:
        raise StructureError("power needs s >= 1")
    rows = np.array(list(itertools.product(range(ego.size), repeat=s)), dtype=np.int64).reshape(-1, s)
    return lifted_structure(ego, rows, name=f"{ego.name or 'M~'}^{s}")


def substructure_closure(X: FiniteStructure, gens: Sequence[int]) -> tuple[int, ...]:
    """Least subset containing ``gens`` closed under the total operations and
    under partial operations on tuples from inside the subset."""
    members = set(int(g) for g in gens)
    frontier = list(members)
    unary = [t for t in X.ops.values() if t.ndim == 1]
    higher = [t for t in X.ops.values() if t.ndim > 1]
    parts = list(X.partials.values())
    while frontier:
        new = []
        for t in unary:
            for x in frontier:
                y = int(t[x])
                if y not in members:
                    members.add(y)
                    new.append(y)
        fset = set(frontier)
        cur = sorted(members)
        for t in higher:
            for args in itertools.product(cur, repeat=t.ndim):
                if fset.intersection(args):
                    y = int(t[args])
                    if y not in members:
                        members.add(y)
                        new.append(y)
        for k, graph in parts:
            for args, y in graph.items():
                if y not in members and all(a in members for a in args):
                    members.add(y)
                    new.append(y)
        frontier = new
    return tuple(sorted(members))


def induced_substructure(X: FiniteStructure, subset: Sequence[int], name: str | None = None) -> tuple[FiniteStructure, "StructMorphism"]:
    """The substructure on a closed ``subset`` (renumbered in sorted order) and its inclusion."""
    elems = sorted(set(int(x) for x in subset))
    if substructure_closure(X, elems) != tuple(elems):
        raise StructureError(f"{elems} is not closed")
    pos = {x: i for i, x in enumerate(elems)}
    idx = np.array(elems, dtype=np.int64)
    ops = {}
    for op, t in X.ops.items():
        sub = t[np.ix_(*([idx] * t.ndim))]
        ops[op] = np.vectorize(pos.__getitem__, otypes=[np.int64])(sub)
    partials = {op: (k, {tuple(pos[a] for a in args): pos[v] for args, v in g.items() if all(a in pos for a in args)}) for op, (k, g) in X.partials.items()}
    relations = {r: (k, frozenset(tuple(pos[a] for a in t) for t in ts if all(a in pos for a in t))) for r, (k, ts) in X.relations.items()}
    labels = tuple(X.label(x) for x in elems) if X.labels is not None else None
    points = tuple(X.points[x] for x in elems) if X.points is not None else None
    Y = FiniteStructure(len(elems), ops, partials, relations, labels, points, name)
    return Y, StructMorphism(Y, X, tuple(elems))


@dataclass(frozen=True, eq=False)
class StructMorphism:
    source: FiniteStructure
    target: FiniteStructure
    map: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.map[x]

    def __eq__(self, other):
        if not isinstance(other, StructMorphism):
            return NotImplemented
        return self.map == other.map and self.source is other.source and self.target is other.target

    def __hash__(self):
        return hash(self.map)

    def compose(self, inner: "StructMorphism") -> "StructMorphism":
        """``self`` after ``inner``."""
        return StructMorphism(inner.source, self.target, tuple(self.map[x] for x in inner.map))

    def image(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.map)))

    def is_surjective(self) -> bool:
        return len(set(self.map)) == self.target.size

    def is_injective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    def is_embedding(self) -> bool:
        return self.is_injective() and reflects(self.source, self.target, self.map)


def preserves(X: FiniteStructure, Y: FiniteStructure, m: Sequence[int]) -> bool:
    """Whether ``m`` is a morphism ``X -> Y``."""
    for op, t in X.ops.items():
        u = Y.ops[op]
        for args in itertools.product(range(X.size), repeat=t.ndim):
            if m[int(t[args])] != int(u[tuple(m[a] for a in args)]):
                return False
    for op, (k, g) in X.partials.items():
        h = Y.partials[op][1]
        for args, v in g.items():
            img = tuple(m[a] for a in args)
            if img not in h or h[img] != m[v]:
                return False
    for r, (k, ts) in X.relations.items():
        us = Y.relations[r][1]
        if any(tuple(m[a] for a in t) not in us for t in ts):
            return False
    return True


def reflects(X: FiniteStructure, Y: FiniteStructure, m: Sequence[int]) -> bool:
    """For injective ``m``: relations and partial domains on the image come from ``X``."""
    inv = {y: x for x, y in enumerate(m)}
    for r, (k, ts) in Y.relations.items():
        xs = X.relations[r][1]
        for t in ts:
            if all(a in inv for a in t) and tuple(inv[a] for a in t) not in xs:
                return False
    for op, (k, g) in Y.partials.items():
        xg = X.partials[op][1]
        for args in g:
            if all(a in inv for a in args) and tuple(inv[a] for a in args) not in xg:
                return False
    return True


class _Constraint:
    __slots__ = ("scope", "allowed")

    def __init__(self, scope: tuple[int, ...], allowed: frozenset):
        self.scope = scope
        self.allowed = allowed


def _constraints(X: FiniteStructure, Y: FiniteStructure) -> list[_Constraint]:
    if X.signature != Y.signature:
        raise StructureError("structures of different type")
    out = []
    for op, t in X.ops.items():
        u = Y.ops[op]
        k = t.ndim
        allowed = frozenset(args + (int(u[args]),) for args in itertools.product(range(Y.size), repeat=k))
        for args in itertools.product(range(X.size), repeat=k):
            out.append(_Constraint(args + (int(t[args]),), allowed))
    for op, (k, g) in X.partials.items():
        allowed = frozenset(args + (v,) for args, v in Y.partials[op][1].items())
        for args, v in g.items():
            out.append(_Constraint(args + (v,), allowed))
    for r, (k, ts) in X.relations.items():
        allowed = Y.relations[r][1]
        for t in ts:
            out.append(_Constraint(t, allowed))
    return out


def iter_struct_morphisms(
    X: FiniteStructure, Y: FiniteStructure, mode: Mode = "all", fixed: Mapping[int, int] | None = None, ordered: bool = True
) -> Iterator[StructMorphism]:
    """Backtracking search with forward checking.

    With ``ordered`` the maps come out in lexicographic order of their
    value tuples (this may buffer them); otherwise in search order.
    ``fixed`` pins some points in advance (used to try retractions first).
    """
    cons = _constraints(X, Y)
    n, m = X.size, Y.size
    full = (1 << m) - 1
    domains = [full] * n
    if fixed:
        for x, y in fixed.items():
            domains[x] &= 1 << y
    # unary constraints prune domains up front
    by_var: list[list[_Constraint]] = [[] for _ in range(n)]
    for c in cons:
        vars_ = set(c.scope)
        if len(vars_) == 1:
            x = c.scope[0]
            ok = 0
            for t in c.allowed:
                if len(set(t)) == 1:
                    ok |= 1 << t[0]
            domains[x] &= ok
        else:
            for x in vars_:
                by_var[x].append(c)
    if any(d == 0 for d in domains):
        return
    # static order: most constrained first, ties by index
    order = sorted(range(n), key=lambda x: (-len(by_var[x]), x))
    position = {x: i for i, x in enumerate(order)}
    assign = [-1] * n
    want_surj = mode == "surjective"
    want_inj = mode == "embedding"

    def supported(c: _Constraint, doms) -> list[tuple[int, int]] | None:
        """Narrow the unassigned variables of ``c``; None on wipe-out."""
        free = [i for i, x in enumerate(c.scope) if assign[x] < 0]
        changes = []
        if not free:
            return changes if tuple(assign[x] for x in c.scope) in c.allowed else None
        masks = {}
        for t in c.allowed:
            good = True
            for i, x in enumerate(c.scope):
                v = assign[x]
                if v >= 0:
                    if t[i] != v:
                        good = False
                        break
                elif not (doms[x] >> t[i]) & 1:
                    good = False
                    break
            if not good:
                continue
            # repeated variables in a scope must agree
            seen = {}
            for i, x in enumerate(c.scope):
                if x in seen and seen[x] != t[i]:
                    good = False
                    break
                seen[x] = t[i]
            if not good:
                continue
            for i in free:
                x = c.scope[i]
                masks[x] = masks.get(x, 0) | (1 << t[i])
        for i in free:
            x = c.scope[i]
            nd = doms[x] & masks.get(x, 0)
            if nd == 0:
                return None
            if nd != doms[x]:
                changes.append((x, nd))
        return changes

    def extend(k: int, doms: list[int], used: int):
        if k == n:
            mp = tuple(assign)
            if want_surj and used != full:
                return
            if want_inj and not reflects(X, Y, mp):
                return
            yield StructMorphism(X, Y, mp)
            return
        x = order[k]
        if want_surj:
            missing = bin(full & ~used).count("1")
            if missing > n - k:
                return
        d = doms[x]
        v = 0
        while d:
            if d & 1:
                if not (want_inj and (used >> v) & 1):
                    assign[x] = v
                    nd = list(doms)
                    nd[x] = 1 << v
                    ok = True
                    queue = list(by_var[x])
                    while queue and ok:
                        c = queue.pop()
                        ch = supported(c, nd)
                        if ch is None:
                            ok = False
                            break
                        for y, mask in ch:
                            nd[y] = mask
                            queue.extend(by_var[y])
                    if ok and want_inj:
                        # forbid already-used values on the remaining variables
                        for y in order[k + 1 :]:
                            if assign[y] < 0:
                                nd[y] &= ~(used | (1 << v))
                                if nd[y] == 0:
                                    ok = False
                                    break
                    if ok:
                        yield from extend(k + 1, nd, used | (1 << v))
                    assign[x] = -1
            d >>= 1
            v += 1

    if ordered and order != list(range(n)):
        yield from sorted(extend(0, domains, 0), key=lambda f: f.map)
    else:
        yield from extend(0, domains, 0)


def enumerate_struct_morphisms(X: FiniteStructure, Y: FiniteStructure, mode: Mode = "all") -> list[StructMorphism]:
    """Morphisms ``X -> Y`` filtered by ``mode``, sorted by value tuples;
    ``first`` returns at most one."""
    if mode == "first":
        f = first_struct_morphism(X, Y)
        return [f] if f is not None else []
    return list(iter_struct_morphisms(X, Y, mode))


def first_struct_morphism(X: FiniteStructure, Y: FiniteStructure, mode: Mode = "all", fixed: Mapping[int, int] | None = None) -> StructMorphism | None:
    if mode == "first":
        mode = "all"
    for f in iter_struct_morphisms(X, Y, mode, fixed, ordered=False):
        return f
    return None


def is_structure_isomorphic(X: FiniteStructure, Y: FiniteStructure) -> tuple[bool, StructMorphism | None]:
    if X.size != Y.size or X.signature != Y.signature:
        return False, None
    for k, r in X.relations.items():
        if len(r[1]) != len(Y.relations[k][1]):
            return False, None
    f = first_struct_morphism(X, Y, "embedding")
    return f is not None, f


def isomorphism_check(f: StructMorphism) -> bool:
    """Whether a given map is an isomorphism of structures."""
    return f.is_surjective() and f.is_injective() and preserves(f.source, f.target, f.map) and reflects(f.source, f.target, f.map)
