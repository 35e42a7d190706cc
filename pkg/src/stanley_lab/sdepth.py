"""Stanley depth of squarefree monomial ideals given as prime intersections.

Squarefree monomials of ``I`` are identified with their supports; the set of
supports lying in ``I`` is the characteristic poset, and a partition of it
into intervals ``[sigma, rho]`` is the Stanley decomposition
``I = ⊕ x^sigma K[x_j : j in rho]`` whose Stanley depth is ``min |rho|``.

Every membership question below (in ``I``, in a restriction of ``I``, in one
of the pieces of a split) is a condition on the support of a monomial only:
each ideal involved is an intersection of ideals generated by variables, and
a monomial lies in such an ideal iff its support meets every generator set.
So checking supports checks all monomials.
"""

from __future__ import annotations

import itertools
import re
import threading
import time
from dataclasses import dataclass, field, replace
from math import comb

import numpy as np

from .core import (ZERO, PrimeFamily, StanleyLabError, VarSet, _Zero, canonical_form,
                   format_varset, members, popcount, restrict_family, submasks, subfamily,
                   support_family)

CHAR_POSET_MAX_N = 20
EXACT_MAX_N = 8
EXACT_BEST_EFFORT_MAX_N = 10
DEFAULT_BUDGET_MS = 20_000


# -- characteristic poset -------------------------------------------------------

class CharPoset:
    """Supports of the squarefree monomials in ``I``, as a membership table."""

    def __init__(self, F: PrimeFamily):
        if F.n > CHAR_POSET_MAX_N:
            raise StanleyLabError(f"characteristic poset capped at n={CHAR_POSET_MAX_N}")
        self.family = F
        self.n = F.n
        self._table: np.ndarray | None = None

    def __contains__(self, sigma: VarSet) -> bool:
        return all(sigma & p for p in self.family.primes)

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            masks = np.arange(1 << self.n, dtype=np.int64)
            ok = np.ones(1 << self.n, dtype=bool)
            for p in self.family.primes:
                ok &= (masks & p) != 0
            self._table = ok
        return self._table

    def elements(self) -> list[VarSet]:
        return [int(m) for m in np.flatnonzero(self.table)]

    def __len__(self) -> int:
        return int(self.table.sum())


def char_poset(F: PrimeFamily) -> CharPoset:
    return CharPoset(F)


# -- interval partitions ----------------------------------------------------------

@dataclass(frozen=True)
class IntervalPartition:
    intervals: tuple[tuple[VarSet, VarSet], ...]

    @property
    def sdepth(self) -> int:
        return min(popcount(top) for _, top in self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)


def partition_problem(F: PrimeFamily, P: IntervalPartition) -> str | None:
    """Why ``P`` is not an interval partition of the poset of ``F`` (``None`` if it is).

    Rebuilds coverage from scratch using only raw membership.
    """
    cover = [0] * (1 << F.n)
    for bottom, top in P.intervals:
        if bottom & ~top:
            return f"bottom {format_varset(bottom)} not inside top {format_varset(top)}"
        if top & ~F.full:
            return f"top {format_varset(top)} outside the ring"
        free = top & ~bottom
        for extra in submasks(free):
            nu = bottom | extra
            if not all(nu & p for p in F.primes):
                return f"{format_varset(nu)} in [{format_varset(bottom)}, " \
                       f"{format_varset(top)}] is not in the ideal"
            cover[nu] += 1
    for sigma in range(1 << F.n):
        inside = all(sigma & p for p in F.primes)
        if inside and cover[sigma] != 1:
            return f"{format_varset(sigma)} covered {cover[sigma]} times"
    return None


def is_valid_partition(F: PrimeFamily, P: IntervalPartition) -> bool:
    return partition_problem(F, P) is None


# -- exact search -----------------------------------------------------------------

@dataclass(frozen=True)
class ExactSdepth:
    value: int | None
    partition: IntervalPartition | None = None
    reason: str = ""

    @property
    def indeterminate(self) -> bool:
        return self.value is None


class _Timeout(Exception):
    pass


class _KSearch:
    """Does the poset admit an interval partition with all tops of size >= k?

    It is enough to cover the elements of size < k by disjoint intervals whose
    tops have size exactly k: an interval with a larger top, cut to sizes
    <= k, splits into such intervals, and every element of size >= k can
    stand alone.  Elements are taken in order of size, so the chosen element
    is always minimal among the uncovered ones and must be a bottom.
    """

    def __init__(self, F: PrimeFamily, k: int, deadline: float | None):
        self.F = F
        self.n = F.n
        self.k = k
        self.deadline = deadline
        self.nodes = 0
        inside = CharPoset(F).table
        self.inside = inside
        self.levels: list[list[int]] = [[] for _ in range(self.n + 1)]
        for m in np.flatnonzero(inside):
            m = int(m)
            self.levels[popcount(m)].append(m)
        self.covered = bytearray(1 << self.n)
        self.uncovered = [len(lv) for lv in self.levels]
        self.chosen: list[tuple[int, int]] = []

    def run(self) -> list[tuple[int, int]] | None:
        return self.chosen[:] if self._search() else None

    def _lowest_level(self) -> int | None:
        for j in range(self.k):
            if self.uncovered[j]:
                return j
        return None

    def _tops(self, sigma: int, j: int):
        k, covered = self.k, self.covered
        outside = [1 << v for v in range(self.n) if not (sigma >> v) & 1]
        for extra in itertools.combinations(outside, k - j):
            top = sigma
            for b in extra:
                top |= b
            if covered[top]:
                continue
            if any(covered[sigma | b] for b in extra):
                continue
            free = top & ~sigma
            if all(not covered[sigma | e] for e in submasks(free)):
                yield top

    def _search(self) -> bool:
        self.nodes += 1
        if self.deadline is not None and self.nodes % 256 == 0 \
                and time.monotonic() > self.deadline:
            raise _Timeout
        j0 = self._lowest_level()
        if j0 is None:
            return True
        # every uncovered element at the lowest level becomes a bottom whose
        # interval reaches C(k-j0, i-j0) distinct elements at each level i
        u = self.uncovered[j0]
        for i in range(j0 + 1, self.k + 1):
            if u * comb(self.k - j0, i - j0) > self.uncovered[i]:
                return False
        best = None
        for sigma in self.levels[j0]:
            if self.covered[sigma]:
                continue
            tops = list(self._tops(sigma, j0))
            if best is None or len(tops) < len(best[1]):
                best = (sigma, tops)
                if len(tops) <= 1:
                    break
        sigma, tops = best
        for top in tops:
            cells = [sigma | e for e in submasks(top & ~sigma)]
            for c in cells:
                self.covered[c] = 1
                self.uncovered[popcount(c)] -= 1
            self.chosen.append((sigma, top))
            if self._search():
                return True
            self.chosen.pop()
            for c in cells:
                self.covered[c] = 0
                self.uncovered[popcount(c)] += 1
        return False


def _complete(F: PrimeFamily, chosen: list[tuple[int, int]]) -> IntervalPartition:
    """Add singletons for what the k-search left uncovered, then grow intervals
    ``[a, b]`` to ``[a, b + v]`` while ``[a + v, b + v]`` is made of singletons."""
    inside = CharPoset(F).table
    owner: dict[int, int] = {}
    intervals = [list(iv) for iv in chosen]
    for idx, (bottom, top) in enumerate(intervals):
        for e in submasks(top & ~bottom):
            owner[bottom | e] = idx
    for m in np.flatnonzero(inside):
        m = int(m)
        if m not in owner:
            owner[m] = len(intervals)
            intervals.append([m, m])
    alive = [True] * len(intervals)
    changed = True
    while changed:
        changed = False
        for idx, iv in enumerate(intervals):
            if not alive[idx]:
                continue
            bottom, top = iv
            for v in range(F.n):
                bit = 1 << v
                if top & bit:
                    continue
                shifted = [(bottom | e) | bit for e in submasks(top & ~bottom)]
                ok = all(intervals[owner[c]][0] == intervals[owner[c]][1] == c
                         for c in shifted)
                if ok:
                    for c in shifted:
                        alive[owner[c]] = False
                        owner[c] = idx
                    iv[1] = top | bit
                    top = iv[1]
                    changed = True
    out = sorted((b, t) for (b, t), a in zip(intervals, alive) if a)
    return IntervalPartition(tuple(out))


def exact_sdepth(F: PrimeFamily, *, budget_ms: int | None = DEFAULT_BUDGET_MS,
                 max_n: int = EXACT_BEST_EFFORT_MAX_N) -> ExactSdepth:
    """Largest ``k`` admitting an interval partition with every top of size >= k.

    Candidates ``k`` are tried from ``n`` downwards; the size of the smallest
    support in ``I`` always works.  Above :data:`EXACT_MAX_N` variables the
    search is best effort; on a cap or timeout the result is indeterminate,
    never a guess.
    """
    if F.n > max_n:
        return ExactSdepth(None, reason=f"n={F.n} exceeds exact cap {max_n}")
    deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000
    # the least size of a monomial support in I: nothing lies below it
    floor = min(popcount(m) for m in CharPoset(F).elements())
    try:
        for k in range(F.n, floor - 1, -1):
            chosen = _KSearch(F, k, deadline).run()
            if chosen is not None:
                return ExactSdepth(k, _complete(F, chosen))
    except _Timeout:
        return ExactSdepth(None, reason=f"time budget of {budget_ms} ms exhausted")
    raise AssertionError("k = least support size always admits a partition")


def prime_sdepth(n: int, h: int) -> int:
    """Stanley depth of a prime of height ``h`` in ``n`` variables."""
    if not 1 <= h <= n:
        raise ValueError(f"need 1 <= h <= n, got h={h}, n={n}")
    return (n - h) + (h + 1) // 2


# -- decompositions as text --------------------------------------------------------

def _monomial(mask: VarSet, labels) -> str:
    if mask == 0:
        return "1"
    return "*".join(f"x{labels[i - 1]}" for i in members(mask))


def decomposition_from_partition(F: PrimeFamily, P: IntervalPartition) -> str:
    """Print a partition as ``x1*x3·K[x1,x2,x3] ⊕ ...`` in the family's labels."""
    problem = partition_problem(F, P)
    if problem:
        raise StanleyLabError(f"invalid partition: {problem}")
    pieces = []
    for bottom, top in P.intervals:
        ring = ",".join(f"x{F.labels[i - 1]}" for i in members(top))
        pieces.append(f"{_monomial(bottom, F.labels)}·K[{ring}]")
    return " ⊕ ".join(pieces)


_PIECE = re.compile(r"^\s*([^·]+)·K\[([^\]]*)\]\s*$")


def parse_decomposition(F: PrimeFamily, text: str) -> IntervalPartition:
    """Inverse of :func:`decomposition_from_partition`."""
    back = {label: i + 1 for i, label in enumerate(F.labels)}

    def mask(names: list[str]) -> int:
        m = 0
        for name in names:
            name = name.strip()
            if name:
                m |= 1 << (back[int(name.lstrip("x"))] - 1)
        return m

    intervals = []
    for chunk in text.split("⊕"):
        hit = _PIECE.match(chunk)
        if hit is None:
            raise StanleyLabError(f"cannot parse piece {chunk!r}")
        mono, ring = hit.groups()
        bottom = 0 if mono.strip() == "1" else mask(mono.split("*"))
        intervals.append((bottom, mask(ring.split(","))))
    return IntervalPartition(tuple(intervals))


# -- splitting along a set of main variables ----------------------------------------

@dataclass(frozen=True)
class Piece:
    tau: tuple[int, ...]   # 0-based prime positions
    s_tau: VarSet          # R minus the generators of the primes in tau
    J: PrimeFamily         # the other primes restricted to s_tau
    L: PrimeFamily         # the primes in tau restricted to the complement of R


@dataclass(frozen=True)
class SplitResult:
    family: PrimeFamily
    main: VarSet
    piece_zero: PrimeFamily | _Zero   # I ∩ K[R]
    pieces: tuple[Piece, ...]

    @property
    def outside(self) -> VarSet:
        return self.family.full & ~self.main

    def taus(self) -> list[tuple[int, ...]]:
        return [p.tau for p in self.pieces]


def split(F: PrimeFamily, R: VarSet) -> SplitResult:
    """Decompose ``I`` as ``(I ∩ K[R])S ⊕ ⊕_tau (J_tau · L_tau)``.

    ``tau`` ranges over the nonempty sets of primes not inside ``R`` for which
    both restrictions are nonzero.
    """
    full = F.full
    if R == 0 or R & ~full or R == full:
        raise StanleyLabError("main variable set must be a nonempty proper subset")
    if F.support != full:
        raise StanleyLabError("split needs a family whose primes span all variables")
    if not any(p & R == p for p in F.primes):
        raise StanleyLabError(f"no prime lies inside {format_varset(R)}")
    outside = full & ~R
    movable = [i for i, p in enumerate(F.primes) if p & ~R]
    pieces = []
    for size_ in range(1, len(movable) + 1):
        for tau in itertools.combinations(movable, size_):
            used = 0
            for i in tau:
                used |= F.primes[i]
            s_tau = R & ~used
            J = restrict_family(subfamily(F, [i for i in range(F.s) if i not in tau]), s_tau)
            if J is ZERO:
                continue
            L = restrict_family(subfamily(F, tau), outside)
            if L is ZERO:
                continue
            pieces.append(Piece(tau, s_tau, J, L))
    return SplitResult(F, R, restrict_family(F, R), tuple(pieces))


@dataclass(frozen=True)
class DirectSumCheck:
    ok: bool
    witness: VarSet | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_direct_sum(F: PrimeFamily, S: SplitResult) -> DirectSumCheck:
    """Check that every monomial of ``I`` lies in exactly one piece of ``S`` and
    that the pieces contain nothing outside ``I``.

    Each piece is tested from its own definition: ``(I ∩ K[R])S`` needs the
    part of the support inside ``R`` to meet every prime; the piece for
    ``tau`` lives in ``K[S_tau ∪ (complement of R)]`` and needs the support to
    meet each restricted prime of ``J_tau`` inside ``S_tau`` and each prime of
    ``tau`` outside ``R``.
    """
    R, outside = S.main, S.outside
    zero_primes = None if S.piece_zero is ZERO else [p & R for p in F.primes]
    piece_tests = []
    for piece in S.pieces:
        others = [F.primes[i] & piece.s_tau for i in range(F.s) if i not in piece.tau]
        mine = [F.primes[i] & outside for i in piece.tau]
        piece_tests.append((piece.s_tau | outside, others, mine))
    for sigma in range(1 << F.n):
        hits = 0
        if zero_primes is not None and all(sigma & p for p in zero_primes):
            hits += 1
        for ring, others, mine in piece_tests:
            if sigma & ~ring:
                continue
            if all(sigma & p for p in others) and all(sigma & p for p in mine):
                hits += 1
        inside = all(sigma & p for p in F.primes)
        if hits != (1 if inside else 0):
            what = "in I" if inside else "outside I"
            return DirectSumCheck(False, sigma,
                                  f"{format_varset(sigma)} ({what}) lies in {hits} pieces")
    return DirectSumCheck(True)


def candidate_main_sets(F: PrimeFamily, unions: int = 2) -> list[VarSet]:
    """Generator sets of single primes and unions of up to ``unions`` of them,
    kept when they are proper subsets of the variables."""
    full = F.full
    out = set()
    for r in range(1, unions + 1):
        for combo in itertools.combinations(F.primes, r):
            m = 0
            for p in combo:
                m |= p
            if m != full:
                out.add(m)
    return sorted(out, key=lambda m: (popcount(m), m))


# -- lower bounds -------------------------------------------------------------------

@dataclass
class BoundCertificate:
    """A lower bound for ``sdepth I`` together with how it was obtained.

    ``rule`` is one of ``prime``, ``exact``, ``split``, ``free-variables``;
    split certificates list one child per piece (``A0`` first) and pieces
    list their ``J``/``L`` children.
    """

    value: int
    rule: str
    family: str
    note: str = ""
    exact: bool = False
    children: list[BoundCertificate] = field(default_factory=list)
    main: tuple[int, ...] | None = None
    tau: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        out = {"value": self.value, "rule": self.rule, "family": self.family,
               "exact": self.exact, "method": "exact" if self.exact else "bound"}
        if self.note:
            out["note"] = self.note
        if self.main is not None:
            out["main"] = list(self.main)
        if self.tau is not None:
            out["tau"] = list(self.tau)
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        return out


class BoundMemo:
    """Certificates keyed by canonical family; safe to share between threads."""

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()

    def get(self, key):
        return self._data.get(key)

    def put(self, key, value):
        with self._lock:
            self._data.setdefault(key, value)

    def __len__(self) -> int:
        return len(self._data)


@dataclass(frozen=True)
class BoundSettings:
    exact_cap: int = EXACT_MAX_N
    budget_ms: int | None = DEFAULT_BUDGET_MS
    unions: int = 2
    private_extension: bool = False


class _Bounder:
    def __init__(self, settings: BoundSettings, memo: BoundMemo):
        self.settings = settings
        self.memo = memo

    def bound(self, F: PrimeFamily) -> BoundCertificate:
        if F.s == 1 or F.free:
            return self.compute(F, allow_exact=True)
        C = canonical_form(F)
        key = (C, self.settings)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        cert = self.compute(C, allow_exact=True)
        self.memo.put(key, cert)
        return cert

    def compute(self, F: PrimeFamily, allow_exact: bool,
                forced: VarSet | None = None) -> BoundCertificate:
        desc = F.describe()
        if F.s == 1:
            h = popcount(F.primes[0])
            return BoundCertificate(prime_sdepth(F.n, h), "prime", desc,
                                    f"height {h} in {F.n} variables", exact=True)
        if F.free:
            inner = self.bound(support_family(F))
            return BoundCertificate(inner.value + F.free_count, "free-variables", desc,
                                    f"{F.free_count} free variable(s)", inner.exact, [inner])
        best: BoundCertificate | None = None
        if allow_exact and forced is None and F.n <= self.settings.exact_cap:
            ex = exact_sdepth(F, budget_ms=self.settings.budget_ms,
                              max_n=self.settings.exact_cap)
            if not ex.indeterminate:
                return BoundCertificate(ex.value, "exact", desc, "interval partition search",
                                        exact=True)
        mains = [forced] if forced is not None else candidate_main_sets(F, self.settings.unions)
        for R in mains:
            cert = self.split_bound(F, R)
            if best is None or cert.value > best.value:
                best = cert
        assert best is not None, "s >= 2 spanning primes always give a proper main set"
        return best

    def split_bound(self, F: PrimeFamily, R: VarSet) -> BoundCertificate:
        S = split(F, R)
        n, r = F.n, popcount(R)
        children = []
        if S.piece_zero is ZERO:
            a0 = BoundCertificate(n, "A0", "0", "I ∩ K[R] = 0, so A0 = n")
        else:
            inner = self.bound(S.piece_zero)
            a0 = BoundCertificate(inner.value + n - r, "A0", S.piece_zero.describe(),
                                  f"{n - r} variable(s) outside R", inner.exact, [inner])
        children.append(a0)
        for piece in S.pieces:
            children.append(self.piece_bound(F, S, piece))
        value = min(c.value for c in children)
        return BoundCertificate(value, "split", F.describe(),
                                f"min over A0 and {len(S.pieces)} piece(s)",
                                children=children, main=members(R))

    def piece_bound(self, F: PrimeFamily, S: SplitResult, piece: Piece) -> BoundCertificate:
        j = self.bound(piece.J)
        if self.settings.private_extension:
            j = max(j, self.extended_j(F, S, piece), key=lambda c: c.value)
        l_ = self.bound(piece.L)
        return BoundCertificate(j.value + l_.value, "piece", f"J={piece.J.describe()} "
                                f"L={piece.L.describe()}", "sdepth J + sdepth L",
                                children=[j, l_], tau=tuple(i + 1 for i in piece.tau))

    def extended_j(self, F: PrimeFamily, S: SplitResult, piece: Piece) -> BoundCertificate:
        # sdepth(J ∩ K[A]) >= sdepth(J) - 1 per removed variable; extend s_tau by
        # the outside variables the primes of tau do not use
        used = 0
        for i in piece.tau:
            used |= F.primes[i]
        extra = S.outside & ~used
        if not extra:
            return BoundCertificate(-1, "extension", "", "no variables to add")
        wide = restrict_family(subfamily(F, [i for i in range(F.s) if i not in piece.tau]),
                               piece.s_tau | extra)
        if wide is ZERO:
            return BoundCertificate(-1, "extension", "", "extension is zero")
        inner = self.bound(wide)
        k = popcount(extra)
        return BoundCertificate(inner.value - k, "extension", piece.J.describe(),
                                f"bound on {k} more variable(s) minus {k}", children=[inner])


def sdepth_lower_bound(F: PrimeFamily, *, main: VarSet | None = None, use_exact: bool = True,
                       exact_cap: int = EXACT_MAX_N, budget_ms: int | None = DEFAULT_BUDGET_MS,
                       unions: int = 2, private_extension: bool = False,
                       memo: BoundMemo | None = None) -> BoundCertificate:
    """Best certified lower bound for ``sdepth I``.

    ``main`` forces a single split along that variable set at the top level.
    ``use_exact=False`` keeps the exact search away from the top level (it is
    still used on the smaller pieces), which gives a purely constructive bound.
    """
    settings = BoundSettings(exact_cap, budget_ms, unions, private_extension)
    engine = _Bounder(settings, memo if memo is not None else BoundMemo())
    if main is not None:
        if F.free:
            raise StanleyLabError("forced main sets need a family spanning all variables")
        return engine.compute(F, allow_exact=False, forced=main)
    return engine.compute(F, allow_exact=use_exact)


def piece_for(cert: BoundCertificate, tau: tuple[int, ...]) -> BoundCertificate | None:
    """The child of a split certificate for the given (1-based) ``tau``."""
    for child in cert.children:
        if child.tau == tuple(tau):
            return child
    return None


__all__ = [
    "BoundCertificate", "BoundMemo", "CharPoset", "DirectSumCheck", "ExactSdepth",
    "IntervalPartition", "Piece", "SplitResult", "candidate_main_sets", "char_poset",
    "decomposition_from_partition", "exact_sdepth", "is_valid_partition",
    "parse_decomposition", "partition_problem", "piece_for", "prime_sdepth",
    "sdepth_lower_bound", "split", "verify_direct_sum",
]
