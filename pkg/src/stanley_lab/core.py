"""Variable sets and reduced intersections of monomial prime ideals.

A monomial prime ideal of ``K[x_1, ..., x_n]`` is generated by a subset of the
variables, so it is stored as that subset.  Subsets of variables are plain
``int`` bitmasks: bit ``i - 1`` is set when ``x_i`` is a member.  Everything in
this module is an immutable value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_VARS = 64
BRUTE_FORCE_CANONICAL_MAX_N = 8
_MAX_REFINED_PERMUTATIONS = 1_000_000

VarSet = int


class StanleyLabError(Exception):
    """Base class for errors raised by this package."""


class FamilyError(StanleyLabError, ValueError):
    """Invalid input to a prime family constructor."""


class _Zero:
    """The zero ideal, returned when a restriction kills some prime."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ZERO"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Zero, ())


ZERO = _Zero()


# -- VarSet helpers ---------------------------------------------------------

def varset(indices: Iterable[int]) -> VarSet:
    """Bitmask of a collection of 1-based variable indices."""
    mask = 0
    for i in indices:
        if i < 1:
            raise FamilyError(f"variable index {i} out of range")
        mask |= 1 << (i - 1)
    return mask


def members(mask: VarSet) -> tuple[int, ...]:
    """1-based indices of the variables in ``mask``, increasing."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: VarSet) -> int:
    return bin(mask).count("1")


def full_set(n: int) -> VarSet:
    return (1 << n) - 1


def submasks(mask: VarSet):
    """All submasks of ``mask``, including ``mask`` and 0."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def compress(mask: VarSet, onto: VarSet) -> VarSet:
    """Re-index the bits of ``mask`` that lie in ``onto`` to 0..|onto|-1."""
    out = 0
    j = 0
    pos = 0
    while onto:
        if onto & 1:
            if (mask >> pos) & 1:
                out |= 1 << j
            j += 1
        onto >>= 1
        pos += 1
    return out


def format_varset(mask: VarSet, labels: Sequence[int] | None = None) -> str:
    idx = members(mask)
    if labels is not None:
        idx = tuple(labels[i - 1] for i in idx)
    return "{" + ",".join(map(str, idx)) + "}"


# -- families ---------------------------------------------------------------

@dataclass(frozen=True)
class RingContext:
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_VARS:
            raise FamilyError(f"variable count must be in 1..{MAX_VARS}, got {self.n}")


@dataclass(frozen=True)
class PrimeFamily:
    """The ideal ``I = P_1 ∩ ... ∩ P_s`` as an irredundant, sorted tuple of masks.

    ``labels[i]`` is the name of local variable ``i + 1`` in the ring the family
    was originally written in; it survives restriction so reports can speak
    about the original variables.  Labels do not take part in equality.
    """

    n: int
    primes: tuple[VarSet, ...]
    labels: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(1, self.n + 1)))

    @property
    def ring(self) -> RingContext:
        return RingContext(self.n)

    @property
    def s(self) -> int:
        return len(self.primes)

    @property
    def full(self) -> VarSet:
        return full_set(self.n)

    @property
    def support(self) -> VarSet:
        out = 0
        for p in self.primes:
            out |= p
        return out

    @property
    def free(self) -> VarSet:
        return self.full & ~self.support

    @property
    def free_count(self) -> int:
        return self.n - popcount(self.support)

    def heights(self) -> tuple[int, ...]:
        return tuple(popcount(p) for p in self.primes)

    def to_lists(self) -> list[list[int]]:
        return [list(members(p)) for p in self.primes]

    def encode(self) -> str:
        """Compact one-line encoding, used by checkpoint files."""
        body = ";".join(",".join(map(str, members(p))) for p in self.primes)
        return f"{self.n}:{body}"

    def describe(self) -> str:
        """Human readable form in the original variable names."""
        parts = []
        for p in self.primes:
            names = ",".join(f"x{self.labels[i - 1]}" for i in members(p))
            parts.append(f"({names})")
        return " ∩ ".join(parts)

    def __str__(self) -> str:
        return f"n={self.n} " + " ".join(format_varset(p) for p in self.primes)


def decode_family(text: str) -> PrimeFamily:
    n_text, _, body = text.strip().partition(":")
    raw = [[int(v) for v in chunk.split(",")] for chunk in body.split(";") if chunk]
    return reduce_family(int(n_text), raw)


def _irredundant(masks: Iterable[VarSet]) -> tuple[VarSet, ...]:
    # gens_j ⊆ gens_i means P_j ⊆ P_i, so P_i drops out of the intersection
    uniq = sorted(set(masks), key=lambda m: (popcount(m), m))
    kept: list[VarSet] = []
    for m in uniq:
        if not any(k & m == k for k in kept):
            kept.append(m)
    return tuple(sorted(kept))


def family_from_masks(n: int, masks: Iterable[VarSet],
                      labels: tuple[int, ...] = ()) -> PrimeFamily:
    """Build a family from generator masks, dropping redundant components."""
    RingContext(n)
    masks = list(masks)
    if not masks:
        raise FamilyError("a prime family needs at least one prime")
    full = full_set(n)
    for m in masks:
        if m == 0:
            raise FamilyError("empty generator set")
        if m & ~full:
            raise FamilyError(f"generator set {format_varset(m)} exceeds n={n}")
    return PrimeFamily(n, _irredundant(masks), labels)


def reduce_family(n: int | RingContext, raw: Iterable[Iterable[int]]) -> PrimeFamily:
    """Turn lists of 1-based variable indices into a reduced prime family."""
    if isinstance(n, RingContext):
        n = n.n
    RingContext(n)
    masks = []
    for gens in raw:
        gens = list(gens)
        if not gens:
            raise FamilyError("empty generator set")
        bad = [i for i in gens if not 1 <= i <= n]
        if bad:
            raise FamilyError(f"variable index {bad[0]} out of range 1..{n}")
        masks.append(varset(gens))
    return family_from_masks(n, masks)


def subfamily(F: PrimeFamily, indices: Iterable[int]) -> PrimeFamily:
    """Primes of ``F`` at the given 0-based positions (already irredundant)."""
    return PrimeFamily(F.n, tuple(sorted(F.primes[i] for i in indices)), F.labels)


def restrict_family(F: PrimeFamily, A: VarSet) -> PrimeFamily | _Zero:
    """``I ∩ K[A]`` as a family over the ``|A|`` variables of ``A``, or ZERO.

    The restriction of an intersection of primes is the intersection of the
    restricted primes, and a prime restricted to variables it does not touch
    is zero.
    """
    A &= F.full
    if A == 0:
        return ZERO
    restricted = []
    for p in F.primes:
        q = p & A
        if q == 0:
            return ZERO
        restricted.append(compress(q, A))
    labels = tuple(F.labels[i - 1] for i in members(A))
    return family_from_masks(popcount(A), restricted, labels)


def support_family(F: PrimeFamily) -> PrimeFamily:
    """``F`` restricted to its support (drops the free variables)."""
    if F.free == 0:
        return F
    out = restrict_family(F, F.support)
    assert out is not ZERO
    return out


def sum_family(F: PrimeFamily, k: int) -> PrimeFamily:
    """The family ``{P_i + P_k : i != k}``, re-reduced."""
    pk = F.primes[k]
    return family_from_masks(F.n, [p | pk for i, p in enumerate(F.primes) if i != k],
                             F.labels)


def permute_family(F: PrimeFamily, perm: Sequence[int]) -> PrimeFamily:
    """Apply the variable map ``i -> perm[i - 1]`` (both 1-based)."""
    out = []
    for p in F.primes:
        out.append(varset(perm[i - 1] for i in members(p)))
    return family_from_masks(F.n, out)


# -- canonical form -----------------------------------------------------------

@lru_cache(maxsize=None)
def _permutation_table(n: int) -> np.ndarray:
    """``table[k, m]`` is the image of mask ``m`` under the k-th permutation."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int16)
    masks = np.arange(1 << n, dtype=np.int16)
    table = np.zeros((len(perms), 1 << n), dtype=np.int16)
    for b in range(n):
        bit = (masks >> b) & 1
        table |= bit[None, :] << perms[:, b][:, None]
    return table


def _brute_canonical(F: PrimeFamily) -> tuple[VarSet, ...]:
    table = _permutation_table(F.n)
    images = np.sort(table[:, list(F.primes)], axis=1)
    order = np.lexsort(images.T[::-1])
    return tuple(int(m) for m in images[order[0]])


def _refined_canonical(F: PrimeFamily) -> tuple[VarSet, ...]:
    n, primes = F.n, F.primes
    # twins: variables lying in exactly the same primes; swapping them is a symmetry
    membership = {}
    for v in range(n):
        key = tuple(i for i, p in enumerate(primes) if (p >> v) & 1)
        membership.setdefault(key, []).append(v)
    classes = list(membership.items())

    # colour refinement on the incidence structure
    var_col = {v: 0 for v in range(n)}
    prime_col = [popcount(p) for p in primes]
    for _ in range(n + len(primes)):
        var_sig = {v: (var_col[v], tuple(sorted(prime_col[i] for i, p in enumerate(primes)
                                                    if (p >> v) & 1)))
                   for v in range(n)}
        ranks = {sig: r for r, sig in enumerate(sorted(set(var_sig.values())))}
        new_var = {v: ranks[var_sig[v]] for v in range(n)}
        prime_sig = [(prime_col[i], tuple(sorted(new_var[v] for v in range(n) if (p >> v) & 1)))
                     for i, p in enumerate(primes)]
        pranks = {sig: r for r, sig in enumerate(sorted(set(prime_sig)))}
        new_prime = [pranks[sig] for sig in prime_sig]
        stable = (len(set(new_var.values())) == len(set(var_col.values()))
                  and len(set(new_prime)) == len(set(prime_col)))
        var_col, prime_col = new_var, new_prime
        if stable:
            break

    groups: dict[tuple[int, int], list[list[int]]] = {}
    for _key, vs in classes:
        groups.setdefault((var_col[vs[0]], len(vs)), []).append(vs)
    ordered = [groups[k] for k in sorted(groups)]
    count = 1
    for g in ordered:
        for k in range(2, len(g) + 1):
            count *= k
    if count > _MAX_REFINED_PERMUTATIONS:
        raise StanleyLabError(f"canonical form search too large ({count} orderings)")

    best = None
    for choice in itertools.product(*(itertools.permutations(g) for g in ordered)):
        new_index = {}
        pos = 0
        for group in choice:
            for cls in group:
                for v in cls:
                    new_index[v] = pos
                    pos += 1
        image = []
        for p in primes:
            m = 0
            for v in range(n):
                if (p >> v) & 1:
                    m |= 1 << new_index[v]
            image.append(m)
        key = tuple(sorted(image))
        if best is None or key < best:
            best = key
    return best


def canonical_form(F: PrimeFamily) -> PrimeFamily:
    """Representative of the orbit of ``F`` under permutations of the variables.

    For ``n <= 8`` this is the lexicographically least sorted mask tuple over
    all ``n!`` permutations.  Above that, variables are first split into
    classes by colour refinement of the variable/prime incidence structure
    (an isomorphism invariant), and the least image is taken over the
    orderings compatible with that partition; variables in the same primes
    are interchangeable and are never permuted among themselves.
    """
    if F.n <= BRUTE_FORCE_CANONICAL_MAX_N:
        primes = _brute_canonical(F)
    else:
        primes = _refined_canonical(F)
    return PrimeFamily(F.n, primes)
