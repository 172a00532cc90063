"""Lattices of Y-substructures and the dual form of the minimal generating set."""

from __future__ import annotations

from dataclasses import dataclass

from ..algebra import FiniteAlgebra
from ..congruence import Congruence, _canonical
from .functors import dual_space
from .structures import AlterEgo, FiniteStructure, first_struct_morphism, induced_substructure, is_structure_isomorphic, iter_struct_morphisms, substructure_closure


@dataclass(frozen=True)
class SubstructureLattice:
    """Y-substructures of ``X`` ordered by inclusion, smallest first.

    ``images[i]`` says whether member ``i`` is the closure of a single
    morphism image; ``join_irreducible[i]`` whether it is not the join of
    the members strictly below it.
    """

    structure: FiniteStructure
    members: tuple[tuple[int, ...], ...]
    images: tuple[bool, ...]
    join_irreducible: tuple[bool, ...]

    def labelled(self) -> list[list[str]]:
        return [[self.structure.label(x) for x in m] for m in self.members]

    def maximal_join_irreducibles(self) -> list[tuple[int, ...]]:
        ji = [m for m, j in zip(self.members, self.join_irreducible) if j]
        return [m for m in ji if not any(set(m) < set(o) for o in ji)]


def y_substructure_lattice(X: FiniteStructure, Y: FiniteStructure) -> SubstructureLattice:
    """Closures of images of morphisms ``Y -> X``, closed under joins."""
    images: set[tuple[int, ...]] = set()
    for f in iter_struct_morphisms(Y, X, ordered=False):
        images.add(substructure_closure(X, f.image()))
    family = set(images)
    frontier = list(family)
    while frontier:
        new = []
        for a in frontier:
            for b in list(family):
                j = substructure_closure(X, tuple(set(a) | set(b)))
                if j not in family:
                    family.add(j)
                    new.append(j)
        frontier = new
    members = tuple(sorted(family, key=lambda m: (len(m), m)))
    ji = []
    for m in members:
        below = [o for o in members if set(o) < set(m)]
        if not below:
            ji.append(True)
            continue
        union = set().union(*below)
        ji.append(substructure_closure(X, tuple(union)) != m)
    return SubstructureLattice(X, members, tuple(m in images for m in members), tuple(ji))


def remove_morphic_images(structures: list[FiniteStructure]) -> list[FiniteStructure]:
    """Drop isomorphic duplicates and each structure that is a morphic image of another."""
    uniq: list[FiniteStructure] = []
    for Z in structures:
        if not any(is_structure_isomorphic(Z, W)[0] for W in uniq):
            uniq.append(Z)
    return [Z for Z in uniq if not any(W is not Z and first_struct_morphism(W, Z, "surjective") is not None for W in uniq)]


def dual_min_gen_set(B: FiniteAlgebra, ego: AlterEgo) -> list[FiniteStructure]:
    """Maximal join-irreducible members of the lattice of D(B)-substructures
    of D(B), minus morphic images of one another; ``E`` of the result is
    the minimal generating set of ISP(B)."""
    X = dual_space(B, ego)
    lat = y_substructure_lattice(X, X)
    subs = [induced_substructure(X, m)[0] for m in lat.maximal_join_irreducibles()]
    return remove_morphic_images(subs) if len(subs) > 1 else subs


def all_substructures(X: FiniteStructure) -> list[tuple[int, ...]]:
    """Every closed subset, the empty one included, smallest first."""
    seen = {()}
    todo = [()]
    while todo:
        S = todo.pop()
        for x in range(X.size):
            if x not in S:
                T = substructure_closure(X, S + (x,))
                if T not in seen:
                    seen.add(T)
                    todo.append(T)
    return sorted(seen, key=lambda m: (len(m), m))


def substructure_of_congruence(DA: FiniteStructure, theta: Congruence) -> tuple[int, ...]:
    """Points of ``D(A)`` whose kernel contains ``theta``."""
    rep = theta.rep
    return tuple(i for i, h in enumerate(DA.points) if all(h[a] == h[r] for a, r in enumerate(rep)))


def congruence_of_substructure(A: FiniteAlgebra, DA: FiniteStructure, subset) -> Congruence:
    """Intersection of the kernels of the given points of ``D(A)``."""
    return Congruence(A, _canonical(tuple(DA.points[i][a] for i in subset) for a in range(A.size)))
