"""The hom-functors between algebras and structures, and the evaluation maps.

``D(A)`` is the set of homomorphisms ``A -> M`` with the alter ego's
structure lifted pointwise; ``E(X)`` is the set of morphisms ``X -> M~``
as a subalgebra of ``M^X``.  Both are built from row matrices whose rows
are the maps, so the evaluation maps reduce to column lookups.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..algebra import AlgebraError, FiniteAlgebra, Homomorphism
from ..free import FreeAlgebra, tuple_algebra
from ..homs import enumerate_homomorphisms
from .structures import AlterEgo, FiniteStructure, StructMorphism, StructureError, iter_struct_morphisms, lifted_structure


def _map_label(M: FiniteAlgebra, row: Sequence[int]) -> str:
    labs = [M.label(int(v)) for v in row]
    if all(len(x) == 1 for x in labs):
        return "".join(labs)
    return "(" + ",".join(labs) + ")"


def dual_space(A: FiniteAlgebra | FreeAlgebra, ego: AlterEgo) -> FiniteStructure:
    """``D(A)``; points are the homomorphisms ``A -> M`` sorted by value
    table, and ``points[i]`` is the table of point ``i``.

    For a free algebra the homomorphisms are read off the coordinates, one
    per point of ``M^s`` in lexicographic order.
    """
    M = ego.base
    if isinstance(A, FreeAlgebra):
        if A.base != M:
            raise AlgebraError("free algebra over a different generator")
        rows = np.asarray(A.coords, dtype=np.int64).T
        name = f"D(F({A.s}))"
    else:
        if A.signature != M.signature:
            raise AlgebraError("signature mismatch")
        homs = enumerate_homomorphisms(A, M)
        if not homs:
            raise StructureError(f"{A.name or 'algebra'} has no homomorphisms into {M.name or 'M'}")
        rows = np.array([h.map for h in homs], dtype=np.int64)
        name = f"D({A.name})" if A.name else None
    labels = [_map_label(M, r) for r in rows.tolist()] if rows.shape[1] <= 8 else None
    return lifted_structure(ego, rows, labels=labels, name=name)


def point_rows(X: FiniteStructure) -> np.ndarray:
    if X.points is None:
        raise StructureError("structure carries no point tables")
    return np.array(X.points, dtype=np.int64).reshape(X.size, -1)


def evaluation_rows(X: FiniteStructure, ego: AlterEgo) -> np.ndarray:
    """Morphisms ``X -> M~`` as rows, sorted; cached on ``X`` per alter ego."""
    cache = X.__dict__.setdefault("_eval_rows", {})
    hit = cache.get(id(ego))
    if hit is not None and hit[0] is ego:
        return hit[1]
    maps = [f.map for f in iter_struct_morphisms(X, ego.structure)]
    if not maps:
        raise StructureError("no morphisms into the alter ego")
    rows = np.array(maps, dtype=np.int64).reshape(len(maps), X.size)
    cache[id(ego)] = (ego, rows)
    return rows


def eval_functor(X: FiniteStructure, ego: AlterEgo, name: str | None = None) -> FiniteAlgebra:
    """``E(X)``: morphisms ``X -> M~`` with the operations of ``M`` applied pointwise."""
    rows = evaluation_rows(X, ego)
    M = ego.base
    labels = tuple(_map_label(M, r) for r in rows.tolist()) if X.size <= 8 else None
    return tuple_algebra(M, rows, name=name or (f"E({X.name})" if X.name else "E(X)"), labels=labels)


def _index(rows: np.ndarray) -> dict[bytes, int]:
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    return {r.tobytes(): i for i, r in enumerate(rows)}


def _find(index: dict[bytes, int], vec: np.ndarray, what: str) -> int:
    i = index.get(np.ascontiguousarray(vec, dtype=np.int64).tobytes())
    if i is None:
        raise StructureError(f"{what} is missing from the codomain")
    return i


def natural_evaluation(A: FiniteAlgebra, ego: AlterEgo) -> tuple[Homomorphism, FiniteAlgebra, FiniteStructure]:
    """``e_A: A -> E(D(A))``, ``a`` going to evaluation at ``a``.

    Returns the map together with ``E(D(A))`` and ``D(A)``.
    """
    DA = dual_space(A, ego)
    H = point_rows(DA)
    ED = eval_functor(DA, ego)
    idx = _index(evaluation_rows(DA, ego))
    m = tuple(_find(idx, H[:, a], "evaluation at an element") for a in range(A.size))
    return Homomorphism(A, ED, m), ED, DA


def structure_evaluation(X: FiniteStructure, ego: AlterEgo) -> tuple[StructMorphism, FiniteStructure, FiniteAlgebra]:
    """``epsilon_X: X -> D(E(X))``, ``x`` going to evaluation at ``x``.

    Returns the map together with ``D(E(X))`` and ``E(X)``.
    """
    EX = eval_functor(X, ego)
    R = evaluation_rows(X, ego)
    DE = dual_space(EX, ego)
    idx = _index(point_rows(DE))
    m = tuple(_find(idx, R[:, x], "evaluation at a point") for x in range(X.size))
    return StructMorphism(X, DE, m), DE, EX


def dual_of_homomorphism(f: Homomorphism, DA: FiniteStructure, DB: FiniteStructure) -> StructMorphism:
    """``D(f): D(B) -> D(A)``, ``h`` going to ``h . f``, for ``f: A -> B``."""
    HA, HB = point_rows(DA), point_rows(DB)
    if HA.shape[1] != f.source.size or HB.shape[1] != f.target.size:
        raise StructureError("dual spaces do not match the homomorphism")
    fm = np.array(f.map, dtype=np.int64)
    idx = _index(HA)
    return StructMorphism(DB, DA, tuple(_find(idx, HB[j][fm], "a composite") for j in range(DB.size)))


def dual_of_morphism(phi: StructMorphism, ego: AlterEgo) -> Homomorphism:
    """``E(phi): E(Y) -> E(X)``, ``alpha`` going to ``alpha . phi``, for ``phi: X -> Y``."""
    RX = evaluation_rows(phi.source, ego)
    RY = evaluation_rows(phi.target, ego)
    EX = eval_functor(phi.source, ego)
    EY = eval_functor(phi.target, ego)
    pm = np.array(phi.map, dtype=np.int64)
    idx = _index(RX)
    return Homomorphism(EY, EX, tuple(_find(idx, RY[j][pm], "a composite") for j in range(len(RY))))


def functor_on_morphism(direction: str, arrow, ego: AlterEgo, DA: FiniteStructure | None = None, DB: FiniteStructure | None = None):
    """Apply ``D`` (to a homomorphism) or ``E`` (to a structure morphism)."""
    if direction == "D":
        if not isinstance(arrow, Homomorphism):
            raise TypeError("D acts on homomorphisms")
        DA = DA if DA is not None else dual_space(arrow.source, ego)
        DB = DB if DB is not None else dual_space(arrow.target, ego)
        return dual_of_homomorphism(arrow, DA, DB)
    if direction == "E":
        if not isinstance(arrow, StructMorphism):
            raise TypeError("E acts on structure morphisms")
        return dual_of_morphism(arrow, ego)
    raise ValueError(f"unknown direction {direction!r}")
