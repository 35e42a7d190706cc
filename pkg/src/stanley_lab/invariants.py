"""Combinatorial invariants of a prime family.

All invariants that are defined relative to the maximal ideal are computed on
the support of the family (the union of all generator sets); variables outside
the support are free and are added back where the definition asks for it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import PrimeFamily, VarSet, popcount


@dataclass(frozen=True)
class PairSum:
    union: VarSet
    defect: int  # n - |gens_i ∪ gens_j| = dim S/(P_i + P_j)


def pair_sum_table(F: PrimeFamily) -> dict[tuple[int, int], PairSum]:
    """Union and codimension defect of every unordered pair ``i < j``."""
    out = {}
    for i, j in itertools.combinations(range(F.s), 2):
        u = F.primes[i] | F.primes[j]
        out[(i, j)] = PairSum(u, F.n - popcount(u))
    return out


def _non_maximal_pairs(F: PrimeFamily) -> list[tuple[int, int]]:
    U = F.support
    return [(i, j) for i, j in itertools.combinations(range(F.s), 2)
            if F.primes[i] | F.primes[j] != U]


def size(F: PrimeFamily) -> int:
    """``e - 1`` plus the number of free variables, where ``e`` is the least
    number of primes whose generators cover the support."""
    U = F.support
    for e in range(1, F.s + 1):
        for combo in itertools.combinations(F.primes, e):
            acc = 0
            for p in combo:
                acc |= p
            if acc == U:
                return e - 1 + F.free_count
    raise AssertionError("the primes always cover their own support")


def big_size(F: PrimeFamily) -> int:
    """Least ``t < s`` such that every ``t + 1`` primes cover the support, plus
    the number of free variables; a single prime has ``t = 0``."""
    U = F.support
    if F.s == 1:
        return F.free_count
    for t in range(1, F.s):
        if all(_covers(combo, U) for combo in itertools.combinations(F.primes, t + 1)):
            return t + F.free_count
    raise AssertionError("all s primes cover the support")


def _covers(primes, U: VarSet) -> bool:
    acc = 0
    for p in primes:
        acc |= p
    return acc == U


def min_pair_defect(F: PrimeFamily) -> int | None:
    """The invariant q: least positive ``dim S/(P_i + P_j)`` on the support.

    Returns ``None`` when every pair already spans the support.
    """
    u = popcount(F.support)
    defects = [u - popcount(F.primes[i] | F.primes[j]) for i, j in _non_maximal_pairs(F)]
    return min(defects) if defects else None


def defect_components(F: PrimeFamily, among: list[int]) -> list[list[int]]:
    """Connected components of the graph joining primes whose sum misses part
    of the support, restricted to ``among``."""
    U = F.support
    parent = {i: i for i in among}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(among, 2):
        if F.primes[i] | F.primes[j] != U:
            parent[find(i)] = find(j)
    comps: dict[int, list[int]] = {}
    for i in among:
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values())


def bipartition_condition(F: PrimeFamily) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """A split of the primes into two nonempty blocks with every cross pair
    spanning the support, or ``None``.

    Such a split exists exactly when the graph of non-spanning pairs is
    disconnected; the block containing prime 0 is returned first.
    """
    if F.s < 2:
        return None
    comps = defect_components(F, list(range(F.s)))
    if len(comps) < 2:
        return None
    A = tuple(comps[0])
    B = tuple(sorted(i for c in comps[1:] for i in c))
    return A, B


def has_disjoint_defect_pairs(F: PrimeFamily) -> bool:
    """Every non-spanning pair has a non-spanning pair disjoint from it."""
    bad = _non_maximal_pairs(F)
    for i, j in bad:
        if not any(k not in (i, j) and e not in (i, j) for k, e in bad):
            return False
    return True


def distinguished_pair_shape(F: PrimeFamily) -> tuple[int, ...] | None:
    """An ordering ``(i1, i2, rest...)`` of the primes where ``P_i1 + P_i2``
    misses part of the support and every pair among the rest spans it.

    ``None`` if no non-spanning pair is isolated in this way.
    """
    bad = _non_maximal_pairs(F)
    for i, j in bad:
        if all(k in (i, j) or e in (i, j) for k, e in bad):
            rest = tuple(k for k in range(F.s) if k not in (i, j))
            return (i, j) + rest
    return None


def non_absorbed(F: PrimeFamily) -> list[int]:
    """Primes having a variable outside the sum of all the other primes."""
    out = []
    for k, p in enumerate(F.primes):
        others = 0
        for i, q in enumerate(F.primes):
            if i != k:
                others |= q
        if p & ~others:
            out.append(k)
    return out
