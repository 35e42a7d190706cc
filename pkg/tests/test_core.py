import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stanley_lab.core import (ZERO, FamilyError, PrimeFamily, RingContext, _refined_canonical,
                              canonical_form, compress, decode_family, family_from_masks,
                              format_varset, full_set, members, permute_family, reduce_family,
                              restrict_family, submasks, subfamily, sum_family, support_family,
                              varset)

from conftest import brute_orbit_key, families, in_ideal


def test_varset_roundtrip():
    assert varset([1, 3]) == 0b101
    assert members(0b101) == (1, 3)
    assert format_varset(0b101) == "{1,3}"
    assert sorted(submasks(0b101)) == [0, 1, 4, 5]


def test_compress_packs_bits():
    assert compress(0b1010, 0b1110) == 0b101


def test_reduce_drops_redundant_primes():
    F = reduce_family(2, [[1], [1, 2]])
    assert F.primes == (varset([1]),)
    assert reduce_family(3, [[1, 2], [2, 1], [3]]).s == 2


@pytest.mark.parametrize("n, raw", [
    (3, []),
    (3, [[]]),
    (3, [[1, 4]]),
    (3, [[0]]),
    (0, [[1]]),
    (65, [[1]]),
])
def test_reduce_rejects_bad_input(n, raw):
    with pytest.raises(FamilyError):
        reduce_family(n, raw)


def test_ring_context_bounds():
    RingContext(64)
    with pytest.raises(ValueError):
        RingContext(0)


def test_encoding_and_text():
    F = reduce_family(4, [[3, 4], [1, 2]])
    assert F.encode() == "4:1,2;3,4"
    assert decode_family(F.encode()) == F
    assert F.describe() == "(x1,x2) ∩ (x3,x4)"
    assert str(F) == "n=4 {1,2} {3,4}"


def test_support_and_free_variables():
    F = reduce_family(5, [[1, 2], [2, 3]])
    assert F.support == varset([1, 2, 3])
    assert F.free_count == 2
    G = support_family(F)
    assert G.n == 3 and G.free_count == 0


def test_restrict_kills_missing_prime():
    F = reduce_family(4, [[1, 2], [3, 4]])
    assert restrict_family(F, varset([1, 2])) is ZERO
    G = restrict_family(F, varset([2, 4]))
    assert G.n == 2 and G.primes == (1, 2)
    assert G.labels == (2, 4)


def test_restrict_keeps_labels_through_two_steps():
    F = reduce_family(6, [[1, 2, 5], [3, 4, 6]])
    G = restrict_family(F, varset([2, 3, 5, 6]))
    H = restrict_family(G, varset([1, 2]))   # positions in G: variables 2 and 3
    assert H.labels == (2, 3)
    assert H.to_lists() == [[1], [2]]


def test_sum_family():
    F = reduce_family(4, [[1], [2], [3, 4]])
    G = sum_family(F, 0)
    assert G.to_lists() == [[1, 2], [1, 3, 4]]


@given(families())
def test_encoding_roundtrip(F):
    assert decode_family(F.encode()) == F


@given(st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(1, n), min_size=1, max_size=n),
                       min_size=1, max_size=5).map(lambda raw: (n, raw))))
def test_reduction_is_irredundant_and_keeps_the_ideal(case):
    n, raw = case
    F = reduce_family(n, raw)
    for a in F.primes:
        for b in F.primes:
            assert a == b or a & b != a
    masks = [varset(r) for r in raw]
    for sigma in range(1 << n):
        assert in_ideal(F, sigma) == all(sigma & m for m in masks)


@given(families(), st.data())
def test_restriction_composes(F, data):
    A = data.draw(st.integers(0, F.full))
    B = data.draw(st.integers(0, F.full))
    once = restrict_family(F, A & B)
    first = restrict_family(F, A)
    if first is ZERO:
        assert once is ZERO
        return
    twice = restrict_family(first, compress(A & B, A))
    if once is ZERO:
        assert twice is ZERO
    else:
        assert twice.primes == once.primes
        assert twice.labels == once.labels


@given(families(), st.data())
def test_restriction_is_intersection_with_subring(F, data):
    A = data.draw(st.integers(1, F.full))
    G = restrict_family(F, A)
    for sigma in submasks(A):
        inside = in_ideal(F, sigma)
        if G is ZERO:
            assert not inside
        else:
            assert inside == in_ideal(G, compress(sigma, A))


@given(families(), st.data())
def test_canonical_form_ignores_relabeling(F, data):
    perm = data.draw(st.permutations(range(1, F.n + 1)))
    assert canonical_form(permute_family(F, perm)) == canonical_form(F)


@given(families())
def test_canonical_form_is_idempotent(F):
    C = canonical_form(F)
    assert canonical_form(C) == C


@pytest.mark.parametrize("raw, n", [
    ([[1, 2, 3, 4, 5, 6, 7], [3, 4, 5, 6, 7, 8], [1, 2, 3, 4, 8, 9, 10],
      [1, 2, 5, 8, 9, 10], [5, 6, 7, 8, 9, 10]], 10),
    ([[1, 2], [3, 4], [5, 6], [7, 8, 9]], 9),
    ([[1, 5], [2, 5], [3, 5], [1, 2, 3, 4]], 11),
])
def test_canonical_form_stable_under_random_permutations(raw, n):
    F = reduce_family(n, raw)
    C = canonical_form(F)
    rng = random.Random(7)
    for _ in range(100):
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        assert canonical_form(permute_family(F, perm)) == C


def test_refined_canonical_separates_orbits_like_brute_force():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(2, 5)
        masks = [rng.randint(1, full_set(n)) for _ in range(rng.randint(1, 4))]
        F = family_from_masks(n, masks)
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        G = family_from_masks(n, [rng.randint(1, full_set(n)) for _ in range(F.s)])
        for other in (permute_family(F, perm), G):
            same_orbit = brute_orbit_key(F) == brute_orbit_key(other)
            assert (_refined_canonical(F) == _refined_canonical(other)) == same_orbit


def test_subfamily_and_frozen():
    F = reduce_family(4, [[1, 2], [3, 4], [1, 3]])
    G = subfamily(F, [0, 2])
    assert G.s == 2
    with pytest.raises(AttributeError):
        F.n = 3
    assert isinstance(G, PrimeFamily)
