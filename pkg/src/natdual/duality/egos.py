"""Alter egos built by brute force for lattice-based algebras.

For an algebra with a majority term, the structure carrying every
homomorphism from a subalgebra of ``M`` into ``M`` and every subuniverse
of ``M^2`` yields a strong duality.  Keeping only the meet-irreducible
subuniverses of ``M^2`` gives the same morphisms, so the result stays
small enough to search with.
"""

from __future__ import annotations

import numpy as np

from ..algebra import FiniteAlgebra, all_subuniverses, induced_subalgebra, product
from ..homs import enumerate_homomorphisms
from .structures import AlterEgo, FiniteStructure


def _meet_irreducible(family: list[tuple[int, ...]], top: int) -> list[tuple[int, ...]]:
    sets = [frozenset(s) for s in family]
    out = []
    for s, fs in zip(family, sets):
        if len(fs) == top:
            continue
        above = [o for o in sets if fs < o]
        meet = frozenset.intersection(*above) if above else None
        if meet != fs:
            out.append(s)
    return out


def brute_force_alter_ego(M: FiniteAlgebra, name: str | None = None) -> AlterEgo:
    """Partial endomorphisms as (partial) operations plus meet-irreducible
    subuniverses of ``M^2`` as relations.  Identity maps are left out."""
    n = M.size
    ops: dict[str, np.ndarray] = {}
    partials: dict[str, tuple[int, dict]] = {}
    for S in all_subuniverses(M):
        D, inc = induced_subalgebra(M, S)
        for h in enumerate_homomorphisms(D, M):
            graph = {(inc(x),): h(x) for x in range(D.size)}
            if all(k[0] == v for k, v in graph.items()):
                continue
            if len(S) == n:
                ops[f"e{len(ops)}"] = np.array([graph[(x,)] for x in range(n)])
            else:
                partials[f"p{len(partials)}"] = (1, graph)
    sq = product([M, M])
    subs = all_subuniverses(sq)
    rels = {}
    for S in _meet_irreducible(subs, sq.size):
        rels[f"r{len(rels)}"] = (2, frozenset(divmod(x, n) for x in S))
    return AlterEgo(M, FiniteStructure(n, ops, partials, rels, M.labels, None, name), name)
