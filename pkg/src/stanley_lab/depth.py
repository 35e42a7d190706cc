"""Depth of ``S/I`` for ``I`` a reduced intersection of monomial primes.

Two independent routes:

* :func:`depth_oracle` reads the projective dimension off Hochster's formula,
  ``beta_{i,sigma}(S/I) = dim H~_{|sigma|-i-1}(Delta|_sigma)``, using exact
  ranks of simplicial boundary maps of the Stanley-Reisner complex.
* :func:`depth_by_formula` applies combinatorial depth rules for prime
  intersections and records which rule decided each sub-instance; it only
  falls back to the oracle where no rule applies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import gcd

from .core import (PrimeFamily, StanleyLabError, VarSet, format_varset, members,
                   popcount, submasks, subfamily, sum_family, support_family)
from .invariants import (big_size, bipartition_condition, defect_components,
                         distinguished_pair_shape,
                         has_disjoint_defect_pairs, min_pair_defect, non_absorbed)

DEFAULT_ORACLE_CAP = 12


class OracleCapExceeded(StanleyLabError):
    pass


class DepthMismatch(StanleyLabError):
    """The depth rules and the Hochster oracle gave different values."""


# -- exact ranks ----------------------------------------------------------------

def rank_rational(rows: list[dict[int, int]]) -> int:
    """Rank over Q of a sparse integer matrix given as ``{column: entry}`` rows.

    Fraction-free: each new row is reduced against the stored pivot rows by
    integer combinations and divided by its content, so entries stay small and
    the arithmetic is exact.
    """
    pivots: dict[int, dict[int, int]] = {}
    for row in rows:
        row = {c: v for c, v in row.items() if v}
        while row:
            col = min(row)
            piv = pivots.get(col)
            if piv is None:
                g = 0
                for v in row.values():
                    g = gcd(g, v)
                pivots[col] = {c: v // g for c, v in row.items()}
                break
            a, b = row[col], piv[col]
            new = {}
            for c in row.keys() | piv.keys():
                v = b * row.get(c, 0) - a * piv.get(c, 0)
                if v:
                    new[c] = v
            g = 0
            for v in new.values():
                g = gcd(g, v)
            row = {c: v // g for c, v in new.items()} if g > 1 else new
    return len(pivots)


def rank_gf2(rows: list[int]) -> int:
    """Rank over GF(2) of rows packed as integers."""
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = r
                break
            r ^= basis[top]
    return len(basis)


# -- Stanley-Reisner complex ----------------------------------------------------

@dataclass(frozen=True)
class SRComplex:
    """Faces are the supports of squarefree monomials outside ``I``; for
    ``I = ∩ P_i`` the facets are the complements of the generator sets."""

    n: int
    facets: tuple[VarSet, ...]

    @classmethod
    def of(cls, F: PrimeFamily) -> SRComplex:
        full = F.full
        return cls(F.n, _maximal([full & ~p for p in F.primes]))

    def is_face(self, sigma: VarSet) -> bool:
        return any(sigma & f == sigma for f in self.facets)

    def restricted_facets(self, sigma: VarSet) -> tuple[VarSet, ...]:
        return _maximal([sigma & f for f in self.facets])

    def reduced_homology(self, sigma: VarSet, field: str = "Q") -> dict[int, int]:
        """Nonzero reduced Betti numbers of ``Delta|_sigma``, keyed by degree."""
        facets = self.restricted_facets(sigma)
        if len(facets) == 1:
            # a simplex; only the empty complex {∅} has homology (degree -1)
            return {-1: 1} if facets[0] == 0 else {}
        common = facets[0]
        for f in facets[1:]:
            common &= f
        if common:
            return {}  # cone over any vertex of the common face
        faces: set[int] = set()
        for f in facets:
            faces.update(submasks(f))
        by_size: dict[int, list[int]] = {}
        for face in faces:
            by_size.setdefault(popcount(face), []).append(face)
        for lst in by_size.values():
            lst.sort()
        index = {k: {face: i for i, face in enumerate(lst)} for k, lst in by_size.items()}
        top = max(by_size)
        ranks = {}
        for k in range(1, top + 1):
            ranks[k] = _boundary_rank(by_size[k], index[k - 1], field)
        out = {}
        for k in range(0, top + 1):
            dim_k = len(by_size[k]) - ranks.get(k, 0) - ranks.get(k + 1, 0)
            if dim_k:
                out[k - 1] = dim_k
        return out


def _maximal(masks) -> tuple[VarSet, ...]:
    uniq = sorted(set(masks), key=popcount, reverse=True)
    kept: list[int] = []
    for m in uniq:
        if not any(m & k == m for k in kept):
            kept.append(m)
    return tuple(sorted(kept))


def _boundary_rank(faces: list[int], lower: dict[int, int], field: str) -> int:
    if field == "GF2":
        rows = []
        for face in faces:
            r = 0
            for v in members(face):
                r |= 1 << lower[face & ~(1 << (v - 1))]
            rows.append(r)
        return rank_gf2(rows)
    rows = []
    for face in faces:
        row = {}
        for pos, v in enumerate(members(face)):
            row[lower[face & ~(1 << (v - 1))]] = -1 if pos % 2 else 1
        rows.append(row)
    return rank_rational(rows)


def projective_dimension(F: PrimeFamily, field: str = "Q") -> int:
    complex_ = SRComplex.of(F)
    pd = 0
    for sigma in range(1 << F.n):
        if complex_.is_face(sigma):
            continue  # full simplex: acyclic (sigma = ∅ only gives beta_0)
        size = popcount(sigma)
        for degree in complex_.reduced_homology(sigma, field):
            pd = max(pd, size - degree - 1)
    return pd


def depth_oracle(F: PrimeFamily, *, field: str = "Q", cap: int = DEFAULT_ORACLE_CAP) -> int:
    """``depth S/I`` as ``n - pd(S/I)`` via Hochster's formula.

    ``field`` is ``"Q"`` (the reference) or ``"GF2"``.
    """
    if field not in ("Q", "GF2"):
        raise ValueError(f"unknown field {field!r}")
    if F.n > cap:
        raise OracleCapExceeded(f"depth oracle capped at n={cap}, got n={F.n}")
    return F.n - projective_dimension(F, field)


# -- rule-based computation ------------------------------------------------------

@dataclass(frozen=True)
class TraceStep:
    rule: str
    family: str
    value: int
    note: str
    level: int


@dataclass
class DepthReport:
    depth_quotient: int
    trace: list[TraceStep] = field(default_factory=list)
    oracle_value: int | None = None

    @property
    def depth_ideal(self) -> int:
        return self.depth_quotient + 1

    @property
    def agreement(self) -> bool | None:
        if self.oracle_value is None:
            return None
        return self.oracle_value == self.depth_quotient

    @property
    def method(self) -> str:
        return "oracle" if any(t.rule == "oracle" for t in self.trace) else "formula"

    def rules(self) -> list[str]:
        return [t.rule for t in self.trace]


RULE_NOTES = {
    "free-variables": "each free variable adds 1 to depth S/I",
    "prime": "S/P is a polynomial ring in n - height variables",
    "big-size-one": "every two primes span the support, so depth S/I = 1",
    "bipartition": "two blocks with all cross sums maximal give depth S/I = 1",
    "all-private": "every prime has a private variable: depth S/I = s - 1",
    "private-variable": "P_k has a private variable: depth S/I = min(depth S/(∩_{i≠k} P_i), "
                        "1 + depth S/(∩_{i≠k} (P_i + P_k)))",
    "isolated-pair": "big size 2 with an isolated non-maximal pair: depth S/I in {1, 2, 1+q} "
                     "decided by how the other primes meet the pair",
    "paired-defects": "big size 2, every non-maximal pair has a disjoint one: "
                      "depth S/I in {1, 2, 1+q}",
    "glue": "P_k plus two blocks with maximal cross sums: depth S/I = "
            "min(depth S/(P_k ∩ block A), depth S/(P_k ∩ block B))",
    "pair-sequence": "both depth S/(J ∩ P_i), depth S/(J ∩ P_j) exceed 1 for a non-maximal "
                     "pair (i, j), so depth S/I = 2",
    "q-is-one": "depth S/I in {2, 1+q} with q = 1",
    "oracle": "no rule applies; Hochster oracle",
}


class _Formula:
    def __init__(self, oracle_cap: int, field: str):
        self.oracle_cap = oracle_cap
        self.field = field
        self.trace: list[TraceStep] = []

    def record(self, rule: str, F: PrimeFamily, value: int, level: int, note: str = "") -> int:
        self.trace.append(TraceStep(rule, F.describe(), value, note or RULE_NOTES[rule], level))
        return value

    def depth(self, F: PrimeFamily, level: int = 0) -> int:
        free = F.free_count
        if free:
            start = len(self.trace)
            self.trace.append(None)  # placeholder keeps the parent before its children
            inner = self.depth(support_family(F), level + 1)
            self.trace[start] = TraceStep("free-variables", F.describe(), inner + free,
                                          f"{free} free variable(s) + depth of the support",
                                          level)
            return inner + free
        return self._full_support(F, level)

    def _full_support(self, F: PrimeFamily, level: int) -> int:
        n, s = F.n, F.s
        if s == 1:
            return self.record("prime", F, n - popcount(F.primes[0]), level)
        t = big_size(F)
        if t == 1:
            return self.record("big-size-one", F, 1, level)
        if bipartition_condition(F) is not None:
            return self.record("bipartition", F, 1, level)
        private = non_absorbed(F)
        if len(private) == s:
            return self.record("all-private", F, s - 1, level)
        if private:
            k = private[-1]
            return self._split(F, k, level)
        if t == 2:
            shape = distinguished_pair_shape(F)
            if shape is not None:
                return self._isolated_pair(F, shape, level)
            if has_disjoint_defect_pairs(F):
                return self._paired_defects(F, level)
        return self._oracle(F, level)

    def _split(self, F: PrimeFamily, k: int, level: int) -> int:
        slot = self._open(level)
        rest = subfamily(F, [i for i in range(F.s) if i != k])
        a = self.depth(rest, level + 1)
        b = self.depth(sum_family(F, k), level + 1)
        value = min(a, 1 + b)
        self._close(slot, "private-variable", F, value, level,
                    f"private variable in prime {format_varset(F.primes[k], F.labels)}: "
                    f"min({a}, 1 + {b})")
        return value

    def _isolated_pair(self, F: PrimeFamily, shape: tuple[int, ...], level: int) -> int:
        U = F.support
        g1, g2 = F.primes[shape[0]], F.primes[shape[1]]
        q = min_pair_defect(F)
        tail = [F.primes[j] for j in shape[2:]]
        if any(g1 | g == U and g2 | g == U for g in tail):
            value, why = 1, "some other prime spans with both members of the pair"
        elif q > 1 and all((g1 | g == U) != (g2 | g == U) for g in tail):
            value, why = 1 + q, f"each other prime spans with exactly one member; 1 + q, q={q}"
        else:
            value, why = 2, "remaining case"
        return self.record("isolated-pair", F, value, level, f"{RULE_NOTES['isolated-pair']}: {why}")

    def _paired_defects(self, F: PrimeFamily, level: int) -> int:
        slot = self._open(level)
        value = self._glue(F, level + 1)
        if value is None:
            value = self._pair_sequence(F, level + 1)
        if value is None and min_pair_defect(F) == 1:
            value = self.record("q-is-one", F, 2, level + 1)
        if value is None:
            value = self._oracle(F, level + 1)
        q = min_pair_defect(F)
        assert value in (1, 2, 1 + q), (value, q)
        self._close(slot, "paired-defects", F, value, level, RULE_NOTES["paired-defects"])
        return value

    def _glue(self, F: PrimeFamily, level: int) -> int | None:
        for k in range(F.s):
            others = [i for i in range(F.s) if i != k]
            blocks = defect_components(F, others)
            if len(blocks) < 2:
                continue
            A = blocks[0]
            B = [i for b in blocks[1:] for i in b]
            slot = self._open(level)
            a = self.depth(subfamily(F, sorted(A + [k])), level + 1)
            b = self.depth(subfamily(F, sorted(B + [k])), level + 1)
            value = min(a, b)
            self._close(slot, "glue", F, value, level,
                        f"{RULE_NOTES['glue']} with k={k + 1}: min({a}, {b})")
            return value
        return None

    def _pair_sequence(self, F: PrimeFamily, level: int) -> int | None:
        U = F.support
        for i, j in itertools.combinations(range(F.s), 2):
            if F.primes[i] | F.primes[j] == U:
                continue
            sub = _Formula(self.oracle_cap, self.field)
            a = sub.depth(subfamily(F, [k for k in range(F.s) if k != j]), level + 1)
            b = sub.depth(subfamily(F, [k for k in range(F.s) if k != i]), level + 1)
            if a > 1 and b > 1:
                self.record("pair-sequence", F, 2, level)
                self.trace.extend(sub.trace)
                return 2
        return None

    def _oracle(self, F: PrimeFamily, level: int) -> int:
        return self.record("oracle", F, depth_oracle(F, field=self.field, cap=self.oracle_cap),
                           level)

    def _open(self, level: int) -> int:
        self.trace.append(None)
        return len(self.trace) - 1

    def _close(self, slot: int, rule: str, F: PrimeFamily, value: int, level: int, note: str):
        self.trace[slot] = TraceStep(rule, F.describe(), value, note, level)


def depth_by_formula(F: PrimeFamily, *, check: bool = False, oracle_cap: int = DEFAULT_ORACLE_CAP,
                     field: str = "Q") -> DepthReport:
    """``depth S/I`` by the first applicable rule, recursively, with a trace.

    With ``check=True`` the oracle is also run (when ``n`` is within the cap)
    and stored on the report for comparison.
    """
    engine = _Formula(oracle_cap, field)
    value = engine.depth(F)
    report = DepthReport(value, engine.trace)
    if check and F.n <= oracle_cap:
        report.oracle_value = depth_oracle(F, field=field, cap=oracle_cap)
    return report
