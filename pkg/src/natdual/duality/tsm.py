"""Test spaces: a substructure ``X`` of ``M~^s`` that is a morphic image of
``M~^s`` and contains a copy of ``D(M)``.  ``E(X)`` then generates the same
quasivariety as the s-generated free algebra."""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..algebra import AlgebraError, FiniteAlgebra, minimal_generator_count
from .functors import dual_space, eval_functor
from .lattice import SubstructureLattice, remove_morphic_images, y_substructure_lattice
from .structures import (
    AlterEgo,
    FiniteStructure,
    StructMorphism,
    StructureError,
    check_compatibility,
    first_struct_morphism,
    induced_substructure,
    iter_struct_morphisms,
    power_structure,
    preserves,
    reflects,
    substructure_closure,
)

log = logging.getLogger(__name__)


class SearchExhausted(StructureError):
    def __init__(self, cap: int, examined: int):
        super().__init__(f"no test space with at most {cap} points ({examined} candidates examined); raise --size-cap")
        self.cap = cap
        self.examined = examined


@dataclass(frozen=True)
class TSConfiguration:
    """``X`` is the substructure of ``power`` on ``subset``; ``gamma`` maps
    ``power`` onto ``X``; ``eta`` embeds ``dual`` (that is ``D(M)``) in ``X``."""

    power: FiniteStructure
    subset: tuple[int, ...]
    X: FiniteStructure
    gamma: StructMorphism
    eta: StructMorphism
    dual: FiniteStructure

    def labels(self) -> list[str]:
        return [self.X.label(i) for i in range(self.X.size)]


@dataclass(frozen=True)
class TSHint:
    """Points of ``M~^s`` as value tuples; optional partial images for
    ``gamma`` (missing points of ``X`` go to themselves) and ``eta``
    (keyed by endomorphism tables)."""

    points: tuple[tuple[int, ...], ...]
    gamma: Mapping[tuple[int, ...], tuple[int, ...]] | None = None
    eta: Mapping[tuple[int, ...], tuple[int, ...]] | None = None


def verify_ts_configuration(cfg: TSConfiguration, ego: AlterEgo, s: int) -> tuple[bool, str | None]:
    """Check every condition of a test-space configuration; report the first failure."""
    P = cfg.power
    if P.size != ego.size**s or P.points is None or any(len(p) != s for p in P.points):
        return False, "power has the wrong shape"
    if P != power_structure(ego, s):
        return False, "power is not the lifted alter ego"
    if substructure_closure(P, cfg.subset) != tuple(sorted(cfg.subset)):
        return False, "X is not closed in the power"
    if cfg.X != induced_substructure(P, cfg.subset)[0]:
        return False, "X is not the induced substructure"
    g = cfg.gamma
    if g.source is not P or g.target is not cfg.X:
        return False, "gamma has the wrong endpoints"
    if not preserves(P, cfg.X, g.map):
        return False, "gamma does not preserve the structure"
    if not g.is_surjective():
        return False, "gamma is not surjective"
    e = cfg.eta
    if e.target is not cfg.X or e.source.size != cfg.dual.size:
        return False, "eta has the wrong endpoints"
    if cfg.dual != dual_space(ego.base, ego):
        return False, "eta does not start at D(M)"
    if not preserves(cfg.dual, cfg.X, e.map):
        return False, "eta does not preserve the structure"
    if not e.is_injective() or not reflects(cfg.dual, cfg.X, e.map):
        return False, "eta is not an embedding"
    return True, None


def _surjection_onto(P: FiniteStructure, X: FiniteStructure, subset: Sequence[int]) -> StructMorphism | None:
    """A morphism from ``P`` onto ``X``; retractions (fixing ``subset``) are tried first."""
    fixed = {p: i for i, p in enumerate(subset)}
    f = first_struct_morphism(P, X, "surjective", fixed=fixed)
    if f is None:
        f = first_struct_morphism(P, X, "surjective")
    return f


def configuration_from_subset(ego: AlterEgo, s: int, subset: Sequence[int], power: FiniteStructure | None = None, dual: FiniteStructure | None = None) -> TSConfiguration | None:
    """Complete a closed subset of ``M~^s`` to a configuration, or None."""
    P = power if power is not None else power_structure(ego, s)
    DM = dual if dual is not None else dual_space(ego.base, ego)
    subset = tuple(sorted(subset))
    X = induced_substructure(P, subset, name="X")[0]
    eta = first_struct_morphism(DM, X, "embedding")
    if eta is None:
        return None
    gamma = _surjection_onto(P, X, subset)
    if gamma is None:
        return None
    return TSConfiguration(P, subset, X, gamma, eta, DM)


def configuration_from_hint(ego: AlterEgo, s: int, hint: TSHint) -> TSConfiguration:
    P = power_structure(ego, s)
    DM = dual_space(ego.base, ego)
    where = {p: i for i, p in enumerate(P.points)}
    try:
        subset = tuple(sorted(where[tuple(p)] for p in hint.points))
    except KeyError as exc:
        raise StructureError(f"hint point {exc.args[0]} is not in M~^{s}") from None
    if substructure_closure(P, subset) != subset:
        raise StructureError("hinted points are not closed")
    X = induced_substructure(P, subset, name="X")[0]
    pos = {p: i for i, p in enumerate(subset)}
    if hint.gamma is not None:
        m = []
        for j, p in enumerate(P.points):
            img = hint.gamma.get(p, p if j in pos else None)
            if img is None or where.get(tuple(img)) not in pos:
                raise StructureError(f"hinted gamma sends {p} outside X")
            m.append(pos[where[tuple(img)]])
        gamma = StructMorphism(P, X, tuple(m))
    else:
        gamma = _surjection_onto(P, X, subset)
        if gamma is None:
            raise StructureError("no morphism from the power onto the hinted X")
    if hint.eta is not None:
        m = []
        for e in DM.points:
            img = hint.eta.get(tuple(e))
            if img is None or where.get(tuple(img)) not in pos:
                raise StructureError(f"hinted eta has no valid image for endomorphism {e}")
            m.append(pos[where[tuple(img)]])
        eta = StructMorphism(DM, X, tuple(m))
    else:
        eta = first_struct_morphism(DM, X, "embedding")
        if eta is None:
            raise StructureError("D(M) does not embed in the hinted X")
    cfg = TSConfiguration(P, subset, X, gamma, eta, DM)
    ok, why = verify_ts_configuration(cfg, ego, s)
    if not ok:
        raise StructureError(f"hinted configuration rejected: {why}")
    return cfg


@dataclass
class SearchStats:
    examined: int = 0
    embeddable: int = 0
    seconds: float = 0.0


def search_ts_configuration(ego: AlterEgo, s: int, size_cap: int | None = None, stats: SearchStats | None = None) -> TSConfiguration:
    """Smallest configuration, ties broken by the sorted point indices.

    Every test space contains an image of ``D(M)``, so candidates are the
    closures of such images grown one point at a time; a heap keyed by
    (size, points) visits them in increasing size, and the first one that
    is a morphic image of the power wins.
    """
    t0 = time.perf_counter()
    stats = stats if stats is not None else SearchStats()
    P = power_structure(ego, s)
    DM = dual_space(ego.base, ego)
    cap = P.size if size_cap is None else size_cap
    heap: list[tuple[int, tuple[int, ...]]] = []
    seen: set[tuple[int, ...]] = set()
    for f in iter_struct_morphisms(DM, P, "embedding", ordered=False):
        c = substructure_closure(P, f.map)
        if len(c) <= cap and c not in seen:
            seen.add(c)
            heapq.heappush(heap, (len(c), c))
    while heap:
        _, subset = heapq.heappop(heap)
        stats.examined += 1
        X = induced_substructure(P, subset, name="X")[0]
        eta = first_struct_morphism(DM, X, "embedding")
        if eta is not None:
            stats.embeddable += 1
            gamma = _surjection_onto(P, X, subset)
            if gamma is not None:
                stats.seconds = time.perf_counter() - t0
                log.info("test space of size %d after %d candidates", len(subset), stats.examined)
                return TSConfiguration(P, subset, X, gamma, eta, DM)
        for p in range(P.size):
            if p in subset:
                continue
            c = substructure_closure(P, subset + (p,))
            if len(c) <= cap and c not in seen:
                seen.add(c)
                heapq.heappush(heap, (len(c), c))
    stats.seconds = time.perf_counter() - t0
    raise SearchExhausted(cap, stats.examined)


@dataclass
class TSMResult:
    dual: FiniteStructure
    config: TSConfiguration
    lattice: SubstructureLattice
    maximal: list[tuple[int, ...]]
    survivors: list[FiniteStructure]
    algebras: list[FiniteAlgebra]
    step4_skipped: bool
    timings: dict[str, float] = field(default_factory=dict)


def test_spaces_method(M: FiniteAlgebra, ego: AlterEgo, s: int, hint: TSHint | None = None, size_cap: int | None = None) -> TSMResult:
    """Minimal generating set of ISP(F_M(s)) computed on the dual side."""
    if ego.base != M:
        raise AlgebraError("alter ego belongs to a different algebra")
    ok, why = check_compatibility(ego)
    if not ok:
        raise StructureError(f"alter ego is not compatible: {why}")
    if minimal_generator_count(M) > s:
        raise AlgebraError(f"{M.name or 'M'} is not {s}-generated")
    timings = {}
    t = time.perf_counter()
    DM = dual_space(M, ego)
    timings["dual"] = time.perf_counter() - t
    t = time.perf_counter()
    cfg = configuration_from_hint(ego, s, hint) if hint is not None else search_ts_configuration(ego, s, size_cap)
    timings["configuration"] = time.perf_counter() - t
    t = time.perf_counter()
    X = cfg.X
    lat = y_substructure_lattice(X, X)
    maximal = lat.maximal_join_irreducibles()
    timings["lattice"] = time.perf_counter() - t
    subs = [induced_substructure(X, m, name="X" if len(m) == X.size else None)[0] for m in maximal]
    skipped = len(subs) == 1
    survivors = subs if skipped else remove_morphic_images(subs)
    t = time.perf_counter()
    algebras = [eval_functor(Z, ego, name=f"E({Z.name or 'Z'})") for Z in survivors]
    timings["evaluation"] = time.perf_counter() - t
    return TSMResult(DM, cfg, lat, maximal, survivors, algebras, skipped, timings)


# pytest would otherwise collect the pipeline as a test when it is imported into a test module
test_spaces_method.__test__ = False
