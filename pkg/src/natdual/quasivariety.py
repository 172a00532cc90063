"""Quasivarieties ISP(K) of finitely many finite algebras.

Membership, Q-congruences, Q-subdirect irreducibility, the two minimal
generating set procedures and the search for a smallest subalgebra
mapping onto a given algebra.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .algebra import AlgebraError, FiniteAlgebra, Homomorphism, induced_subalgebra, minimal_generator_count, require_same_signature, subalgebra_closure
from .congruence import Congruence, congruence_lattice, identity_congruence, quotient
from .homs import embeds, first_homomorphism, is_isomorphic, iter_homomorphisms

log = logging.getLogger(__name__)


def multiset_leq(x: Iterable[int], y: Iterable[int]) -> bool:
    """Dershowitz-Manna order on finite multisets of naturals.

    ``x <= y`` iff they are equal, or every element occurring more often
    in ``x`` than in ``y`` is dominated by a larger element occurring more
    often in ``y`` than in ``x``.
    """
    cx, cy = Counter(x), Counter(y)
    if cx == cy:
        return True
    extra_y = [v for v in cy if cy[v] > cx[v]]
    return all(any(w > v for w in extra_y) for v in cx if cx[v] > cy[v])


def size_multiset(algebras: Iterable[FiniteAlgebra]) -> list[int]:
    return sorted(a.size for a in algebras)


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    witnesses: tuple[Homomorphism, ...]
    unseparated: tuple[int, int] | None = None

    def __bool__(self):
        return self.member


def in_ISP(C: FiniteAlgebra, gens: Sequence[FiniteAlgebra]) -> MembershipReport:
    """Whether ``C`` embeds in a product of members of ``gens``.

    Homomorphisms into each generator are drawn lazily; one is kept as a
    witness whenever it separates a pair no earlier witness separated.
    """
    if not gens:
        raise AlgebraError("empty generating set")
    require_same_signature(C, *gens)
    pending = {(a, b) for a in range(C.size) for b in range(a + 1, C.size)}
    witnesses: list[Homomorphism] = []
    if not pending:
        return MembershipReport(True, ())
    for B in gens:
        for h in iter_homomorphisms(C, B):
            m = h.map
            hit = {p for p in pending if m[p[0]] != m[p[1]]}
            if hit:
                witnesses.append(h)
                pending -= hit
                if not pending:
                    return MembershipReport(True, tuple(witnesses))
    return MembershipReport(False, tuple(witnesses), min(pending))


def q_congruences(A: FiniteAlgebra, gens: Sequence[FiniteAlgebra]) -> list[Congruence]:
    """Congruences ``theta`` with ``A/theta`` in ISP(gens), in the order of
    :func:`congruence_lattice`.  Meet-closure is checked, not assumed."""
    out = [theta for theta in congruence_lattice(A) if in_ISP(quotient(A, theta)[0], gens)]
    reps = {t.rep for t in out}
    for s, t in itertools.combinations(out, 2):
        if (s & t).rep not in reps:
            raise AlgebraError(f"Q-congruences of {A.name or 'algebra'} are not closed under meet")
    return out


def meet_irreducibles(lattice: Sequence[Congruence]) -> list[Congruence]:
    """Members of a finite meet-semilattice (with top) that are not the meet
    of the members strictly above them; the top itself is excluded."""
    out = []
    for theta in lattice:
        above = [t for t in lattice if theta < t]
        if not above:
            continue
        m = above[0]
        for t in above[1:]:
            m = m & t
        if m != theta:
            out.append(theta)
    return out


def is_q_subdirectly_irreducible(A: FiniteAlgebra, gens: Sequence[FiniteAlgebra], con_q: Sequence[Congruence] | None = None) -> bool:
    """Whether the identity congruence is meet-irreducible among the
    Q-congruences; a one-element algebra is not Q-subdirectly irreducible."""
    con_q = q_congruences(A, gens) if con_q is None else con_q
    delta = identity_congruence(A)
    if delta not in con_q:
        raise AlgebraError(f"{A.name or 'algebra'} is not in the quasivariety")
    return delta in meet_irreducibles(con_q)


def _dedupe(algebras: Iterable[FiniteAlgebra]) -> list[FiniteAlgebra]:
    out: list[FiniteAlgebra] = []
    for A in algebras:
        if not any(is_isomorphic(A, B)[0] for B in out):
            out.append(A)
    return out


def remove_proper_subalgebras(algebras: Sequence[FiniteAlgebra]) -> list[FiniteAlgebra]:
    """Drop isomorphic duplicates and every algebra that embeds into a larger member."""
    uniq = _dedupe(algebras)
    return [A for A in uniq if not any(B.size > A.size and embeds(A, B) for B in uniq)]


def min_gen_set_bfs(K: Sequence[FiniteAlgebra]) -> list[FiniteAlgebra]:
    """Breadth-first worklist: replace any algebra whose embeddable proper
    quotients separate its points by the quotients that embed into it but
    into no other member; finish with a proper-subalgebra sweep."""
    if not K:
        raise AlgebraError("empty generating set")
    require_same_signature(*K)
    work = list(K)
    i = 0
    while i < len(work):
        A = work[i]
        others = work[:i] + work[i + 1 :]
        s1: list[tuple[Congruence, FiniteAlgebra]] = []
        s2: list[Congruence] = []
        for theta in congruence_lattice(A):
            if theta.is_identity():
                continue
            Q = quotient(A, theta, name=_quotient_name(A, theta))[0]
            in_self = embeds(Q, A)
            in_other = any(embeds(Q, B) for B in others)
            if in_self:
                s1.append((theta, Q))
            if in_other:
                s2.append(theta)
        covering = [t for t, _ in s1] + s2
        meet = _meet(A, covering)
        if meet.is_identity():
            s2set = set(s2)
            added = _dedupe(Q for t, Q in s1 if t not in s2set)
            log.debug("bfs: replacing %s by %d quotients", A.name, len(added))
            work = others[:i] + added + others[i:]
        else:
            i += 1
    return remove_proper_subalgebras(work)


def min_gen_set_dfs(K: Sequence[FiniteAlgebra]) -> list[FiniteAlgebra]:
    """Per input algebra, take the quotients by the minimal meet-irreducible
    Q-congruences; finish with a proper-subalgebra sweep."""
    if not K:
        raise AlgebraError("empty generating set")
    require_same_signature(*K)
    found: list[FiniteAlgebra] = []
    for A in K:
        con_q = q_congruences(A, K)
        irr = meet_irreducibles(con_q)
        minimal = [t for t in irr if not any(s < t for s in irr)]
        found.extend(quotient(A, t, name=_quotient_name(A, t))[0] for t in minimal)
    return remove_proper_subalgebras(found)


def _meet(A: FiniteAlgebra, thetas: Sequence[Congruence]) -> Congruence:
    out = Congruence(A, (0,) * A.size)
    for t in thetas:
        out = out & t
    return out


def _quotient_name(A: FiniteAlgebra, theta: Congruence) -> str | None:
    if theta.is_identity():
        return A.name
    return f"{A.name or 'A'}/{theta.block_count()}"


def generates_same(K1: Sequence[FiniteAlgebra], K2: Sequence[FiniteAlgebra]) -> bool:
    """ISP(K1) = ISP(K2)."""
    return all(in_ISP(A, K2) for A in K1) and all(in_ISP(B, K1) for B in K2)


def sub_pre_hom(A: FiniteAlgebra, B: FiniteAlgebra) -> tuple[FiniteAlgebra, tuple[int, ...], Homomorphism]:
    """A smallest subalgebra ``C`` of ``A`` admitting a surjection onto ``B``.

    Some such ``C`` is generated by preimages of a minimum generating set
    of ``B``, so only generator sets of that size are tried.  Ties go to
    the lexicographically least generator tuple.  Returns the subalgebra,
    its universe inside ``A`` and a surjection.
    """
    require_same_signature(A, B)
    r = minimal_generator_count(B)
    best: tuple[int, tuple[int, ...], Homomorphism, FiniteAlgebra] | None = None
    tried: set[tuple[int, ...]] = set()
    for combo in itertools.combinations(range(A.size), r):
        limit = best[0] - 1 if best else None
        S = subalgebra_closure(A, combo, limit=limit)
        if S is None or len(S) < B.size or S in tried:
            continue
        tried.add(S)
        C, _ = induced_subalgebra(A, S, name=f"sub({A.name or 'A'})")
        h = first_homomorphism(C, B, "surjective")
        if h is not None:
            best = (len(S), S, h, C)
            if len(S) == B.size:
                break
    if best is None:
        raise AlgebraError(f"no subalgebra of {A.name or 'A'} maps onto {B.name or 'B'}")
    return best[3], best[1], best[2]
