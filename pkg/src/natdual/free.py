"""Free algebras F_M(s) as subalgebras of M^(M^s), and algebras of tuples in general.

Elements are rows of a coordinate matrix over M.  Rows are interned through
a 64-bit linear hash; every hash hit is confirmed by comparing rows, so a
collision raises instead of silently merging two elements.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import AlgebraError, FiniteAlgebra, Signature
from .terms import App, Term, Var

log = logging.getLogger(__name__)

DEFAULT_MEMORY_BUDGET = 2 * 1024**3
_BATCH_CELLS = 1 << 25


class BudgetExceeded(AlgebraError):
    def __init__(self, reached: int, limit: int, what: str = "free algebra"):
        super().__init__(f"{what} exceeded its memory budget after {reached} elements (limit {limit}); raise --mem")
        self.reached = reached
        self.limit = limit


class HashCollision(AlgebraError):
    pass


def _multipliers(width: int) -> np.ndarray:
    rng = np.random.default_rng(0x5EED ^ width)
    return rng.integers(1, 2**63, size=width, dtype=np.uint64) | np.uint64(1)


class TupleIndex:
    """Sorted hash index over the rows of a growing coordinate matrix."""

    def __init__(self, width: int):
        self.width = width
        self.mult = _multipliers(width)
        self.keys = np.empty(0, dtype=np.uint64)
        self.ids = np.empty(0, dtype=np.int64)

    def hash_rows(self, rows: np.ndarray) -> np.ndarray:
        return rows.astype(np.uint64, copy=False) @ self.mult

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        """Element id for each key, or -1."""
        if not len(self.keys):
            return np.full(len(keys), -1, dtype=np.int64)
        pos = np.searchsorted(self.keys, keys)
        pos = np.minimum(pos, len(self.keys) - 1)
        hit = self.keys[pos] == keys
        return np.where(hit, self.ids[pos], -1)

    def add(self, keys: np.ndarray, ids: np.ndarray) -> None:
        allk = np.concatenate([self.keys, keys])
        alli = np.concatenate([self.ids, ids])
        order = np.argsort(allk, kind="stable")
        self.keys = allk[order]
        self.ids = alli[order]


class RowStore:
    """Append-only coordinate matrix with hash interning and derivation records."""

    def __init__(self, width: int, max_rows: int):
        self.width = width
        self.max_rows = max_rows
        self.index = TupleIndex(width)
        self.rows = np.empty((min(max_rows, 1024), width), dtype=np.uint8)
        self.n = 0
        self.deriv_op: list[int] = []
        self.deriv_args: list[tuple[int, ...]] = []

    def _grow(self, need: int) -> None:
        if need > self.max_rows:
            raise BudgetExceeded(self.n, self.max_rows)
        if need > len(self.rows):
            cap = min(max(need, 2 * len(self.rows)), self.max_rows)
            bigger = np.empty((cap, self.width), dtype=np.uint8)
            bigger[: self.n] = self.rows[: self.n]
            self.rows = bigger

    def intern(self, cand: np.ndarray, op: int, args: np.ndarray) -> np.ndarray:
        """Add the new distinct rows of ``cand``; ``args[i]`` derives ``cand[i]``.

        Returns the ids of the rows that were new.
        """
        if not len(cand):
            return np.empty(0, dtype=np.int64)
        keys = self.index.hash_rows(cand)
        known = self.index.lookup(keys)
        hit = known >= 0
        if hit.any():
            if not np.array_equal(self.rows[known[hit]], cand[hit]):
                raise HashCollision("hash collision while interning tuples")
        fresh = ~hit
        if not fresh.any():
            return np.empty(0, dtype=np.int64)
        fkeys = keys[fresh]
        uniq, first, inverse = np.unique(fkeys, return_index=True, return_inverse=True)
        fcand = cand[fresh]
        if not np.array_equal(fcand[first[inverse]], fcand):
            raise HashCollision("hash collision while interning tuples")
        order = np.argsort(first, kind="stable")
        first = first[order]
        uniq = uniq[order]
        count = len(first)
        self._grow(self.n + count)
        ids = np.arange(self.n, self.n + count, dtype=np.int64)
        self.rows[self.n : self.n + count] = fcand[first]
        self.n += count
        self.index.add(uniq, ids)
        fargs = args[fresh][first]
        self.deriv_op.extend([op] * count)
        self.deriv_args.extend(tuple(int(a) for a in row) for row in fargs)
        return ids

    def ids_of(self, rows: np.ndarray) -> np.ndarray:
        keys = self.index.hash_rows(rows)
        ids = self.index.lookup(keys)
        if (ids < 0).any():
            raise AlgebraError("tuple not in the algebra")
        if not np.array_equal(self.rows[ids], rows):
            raise HashCollision("hash collision during lookup")
        return ids

    @property
    def data(self) -> np.ndarray:
        return self.rows[: self.n]


def _apply_rows(table: np.ndarray, arg_rows: Sequence[np.ndarray]) -> np.ndarray:
    return table[tuple(a.astype(np.intp, copy=False) for a in arg_rows)]


def _close(store: RowStore, M: FiniteAlgebra, ops: list[tuple[int, str, np.ndarray | None]], frontier_start: int) -> None:
    """Semi-naive closure.  Each op entry is ``(op id, name, partners)``;
    with ``partners`` given, a binary op is only applied as (new, partner)
    which is enough for the join/meet stages of the lattice fast path."""
    start = frontier_start
    while start < store.n:
        end = store.n
        frontier = np.arange(start, end)
        for op_id, name, partners in ops:
            ar = M.signature.arity(name)
            table = M.tables[name]
            if ar == 1:
                for chunk in _chunks(frontier, max(1, _BATCH_CELLS // store.width)):
                    cand = _apply_rows(table, [store.data[chunk]])
                    store.intern(cand, op_id, chunk[:, None])
            elif partners is not None:
                others = partners
                step = max(1, _BATCH_CELLS // max(1, len(others) * store.width))
                for chunk in _chunks(frontier, step):
                    a = np.repeat(chunk, len(others))
                    b = np.tile(others, len(chunk))
                    cand = _apply_rows(table, [store.data[a], store.data[b]])
                    store.intern(cand, op_id, np.stack([a, b], axis=1))
            else:
                _close_general(store, table, op_id, ar, start, end)
        start = end


def _chunks(arr: np.ndarray, size: int):
    for i in range(0, len(arr), size):
        yield arr[i : i + size]


def _close_general(store: RowStore, table: np.ndarray, op_id: int, ar: int, start: int, end: int) -> None:
    # tuples over [0, end) with at least one argument in [start, end): the
    # first frontier argument sits at position p, earlier ones are old
    for p in range(ar):
        ranges = [np.arange(0, start)] * p + [np.arange(start, end)] + [np.arange(0, end)] * (ar - p - 1)
        if any(len(r) == 0 for r in ranges):
            continue
        outer = ranges[:-1]
        last = ranges[-1]
        step = max(1, _BATCH_CELLS // max(1, len(last) * store.width))
        for prefix in itertools.product(*[list(_chunks(r, step if i == 0 else len(r))) for i, r in enumerate(outer)]) if outer else [()]:
            grids = np.meshgrid(*prefix, last, indexing="ij") if prefix else [last]
            args = [g.ravel() for g in grids]
            cand = _apply_rows(table, [store.data[a] for a in args])
            store.intern(cand, op_id, np.stack(args, axis=1))


def lattice_reduct(M: FiniteAlgebra) -> tuple[str, str] | None:
    """``(meet, join)`` when M is a distributive lattice expanded by constants
    and unary (dual) lattice endomorphisms only; otherwise None."""
    binary = [op for op, ar in M.signature if ar == 2]
    if len(binary) != 2 or any(ar > 2 for _, ar in M.signature):
        return None
    n = M.size
    x, y, z = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    for meet, join in (binary, binary[::-1]):
        m, j = M.tables[meet].astype(np.int64), M.tables[join].astype(np.int64)
        ok = (
            np.array_equal(m, m.T) and np.array_equal(j, j.T)
            and np.array_equal(np.diagonal(m), np.arange(n)) and np.array_equal(np.diagonal(j), np.arange(n))
            and np.array_equal(m[m[x, y], z], m[x, m[y, z]]) and np.array_equal(j[j[x, y], z], j[x, j[y, z]])
            and np.array_equal(m[x[..., 0], j[x[..., 0], y[..., 0]]], x[..., 0])
            and np.array_equal(m[x, j[y, z]], j[m[x, y], m[x, z]])
        )
        if not ok:
            continue
        # meet is the order's glb: x <= y iff x meet y == x; check it is the meet not the join
        if not np.array_equal(j[x[..., 0], m[x[..., 0], y[..., 0]]], x[..., 0]):
            continue
        unary_ok = True
        for op, ar in M.signature:
            if ar != 1:
                continue
            u = M.tables[op].astype(np.int64)
            ux, uy = u[x[..., 0]], u[y[..., 0]]
            endo = np.array_equal(u[m[x[..., 0], y[..., 0]]], m[ux, uy]) and np.array_equal(u[j[x[..., 0], y[..., 0]]], j[ux, uy])
            dual = np.array_equal(u[m[x[..., 0], y[..., 0]]], j[ux, uy]) and np.array_equal(u[j[x[..., 0], y[..., 0]]], m[ux, uy])
            if not (endo or dual):
                unary_ok = False
                break
        if unary_ok:
            return meet, join
    return None


@dataclass(eq=False)
class FreeAlgebra:
    """F_M(s) as a set of tuples indexed by the points of M^s.

    ``coords[i, j]`` is the value of element ``i`` at point ``points[j]``.
    """

    base: FiniteAlgebra
    s: int
    coords: np.ndarray
    generators: tuple[int, ...]
    deriv_op: list[int]
    deriv_args: list[tuple[int, ...]]
    op_names: tuple[str, ...]
    method: str = "closure"

    @property
    def size(self) -> int:
        return len(self.coords)

    @cached_property
    def points(self) -> list[tuple[int, ...]]:
        return list(itertools.product(range(self.base.size), repeat=self.s))

    @cached_property
    def _index(self) -> RowStore:
        store = RowStore(self.coords.shape[1], len(self.coords))
        store.rows = self.coords
        store.n = len(self.coords)
        store.index.add(store.index.hash_rows(self.coords), np.arange(len(self.coords)))
        return store

    def index_of(self, row: Sequence[int]) -> int:
        return int(self._index.ids_of(np.asarray(row, dtype=np.uint8)[None, :])[0])

    @cached_property
    def algebra(self) -> FiniteAlgebra:
        return tuple_algebra(self.base, self.coords, name=f"F({self.base.name or 'M'},{self.s})", store=self._index)

    def term(self, i: int) -> Term:
        """A term in the free generators x0..x{s-1} denoting element ``i``."""
        memo: dict[int, Term] = {}

        def build(k: int) -> Term:
            if k in memo:
                return memo[k]
            op = self.deriv_op[k]
            args = self.deriv_args[k]
            if op < 0:
                t: Term = Var(args[0])
            else:
                t = App(self.op_names[op], tuple(build(a) for a in args))
            memo[k] = t
            return t

        stack = [i]
        # build bottom-up to avoid deep recursion on long derivation chains
        order = []
        seen = set()
        while stack:
            k = stack.pop()
            if k in seen:
                continue
            seen.add(k)
            order.append(k)
            stack.extend(a for a in self.deriv_args[k] if self.deriv_op[k] >= 0)
        for k in sorted(order):
            build(k)
        return build(i)

    def evaluate(self, i: int, images: Sequence[int]) -> int:
        """Image of element ``i`` under the homomorphism sending generator j to ``images[j]``."""
        pt = self.points.index(tuple(images))
        return int(self.coords[i, pt])


def free_algebra(M: FiniteAlgebra, s: int, memory_budget: int = DEFAULT_MEMORY_BUDGET, method: str = "auto") -> FreeAlgebra:
    """The s-generated free algebra of ISP(M) as the subalgebra of
    M^(M^s) generated by the s projections.

    ``method`` is ``closure`` (semi-naive closure under all operations),
    ``lattice`` (meets then joins of the unary closure; only valid when
    :func:`lattice_reduct` applies) or ``auto``.
    """
    if s < 1:
        raise AlgebraError("need at least one generator")
    width = M.size**s
    if width > 1 << 20:
        raise BudgetExceeded(0, 0, f"coordinate space M^{s}")
    max_rows = max(1, memory_budget // (width + 48))
    points = np.array(list(itertools.product(range(M.size), repeat=s)), dtype=np.uint8).reshape(width, s)
    names = M.signature.names
    op_id = {n: i for i, n in enumerate(names)}
    lat = lattice_reduct(M) if method in ("auto", "lattice") else None
    if method == "lattice" and lat is None:
        raise AlgebraError("lattice fast path does not apply to this signature")
    store = RowStore(width, max_rows)
    gens = []
    for j in range(s):
        ids = store.intern(np.ascontiguousarray(points[:, j])[None, :], -1, np.array([[j]]))
        gens.append(int(ids[0]) if len(ids) else int(store.ids_of(points[:, j][None, :])[0]))
    for op, ar in M.signature:
        if ar == 0:
            row = np.full((1, width), int(M.tables[op]), dtype=np.uint8)
            store.intern(row, op_id[op], np.empty((1, 0), dtype=np.int64))
    unary = [(op_id[op], op, None) for op, ar in M.signature if ar == 1]
    if lat is not None:
        meet, join = lat
        _close(store, M, unary, 0)
        base = np.arange(store.n)
        _close(store, M, [(op_id[meet], meet, base)], 0)
        meets = np.arange(store.n)
        _close(store, M, [(op_id[join], join, meets)], 0)
        used = "lattice"
    else:
        _close(store, M, [(op_id[op], op, None) for op, ar in M.signature if ar > 0], 0)
        used = "closure"
    coords = store.data.copy()
    coords.flags.writeable = False
    log.debug("free algebra F(%s,%d): %d elements via %s", M.name, s, len(coords), used)
    return FreeAlgebra(M, s, coords, tuple(gens), store.deriv_op, store.deriv_args, names, used)


def tuple_algebra(M: FiniteAlgebra, rows: np.ndarray, name: str | None = None, labels=None, store: RowStore | None = None) -> FiniteAlgebra:
    """The subalgebra of M^L whose elements are the given rows (element i is row i).

    Raises if the rows are not closed under the operations.
    """
    rows = np.ascontiguousarray(rows, dtype=np.uint8)
    n, width = rows.shape
    if store is None:
        store = RowStore(width, max(n, 1))
        ids = store.intern(rows, -1, np.zeros((n, 1), dtype=np.int64))
        if len(ids) != n:
            raise AlgebraError("rows are not distinct")
    tables = {}
    for op, ar in M.signature:
        t = M.tables[op]
        if ar == 0:
            row = np.full((1, width), int(t), dtype=np.uint8)
            tables[op] = np.array(_lookup(store, row)[0])
        elif ar == 1:
            tables[op] = _lookup(store, t[rows.astype(np.intp)])
        else:
            out = np.empty((n,) * ar, dtype=np.int64)
            flat = out.reshape(n, -1)
            tail = np.array(list(itertools.product(range(n), repeat=ar - 1)), dtype=np.intp).reshape(-1, ar - 1)
            step = max(1, _BATCH_CELLS // max(1, len(tail) * width))
            for chunk in _chunks(np.arange(n), step):
                a = np.repeat(chunk, len(tail))
                others = np.tile(tail, (len(chunk), 1))
                vals = t[(rows[a].astype(np.intp),) + tuple(rows[others[:, k]].astype(np.intp) for k in range(ar - 1))]
                flat[chunk] = _lookup(store, vals).reshape(len(chunk), -1)
            tables[op] = out
    return FiniteAlgebra(M.signature, n, tables, labels, name)


def _lookup(store: RowStore, rows: np.ndarray) -> np.ndarray:
    try:
        return store.ids_of(rows)
    except HashCollision:
        raise
    except AlgebraError:
        raise AlgebraError("rows are not closed under the operations") from None
