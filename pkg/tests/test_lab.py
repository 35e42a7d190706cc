import itertools

import pytest

from stanley_lab.core import StanleyLabError, family_from_masks, full_set, reduce_family
from stanley_lab.lab import (Status, SweepSummary, audit_family, check_instance,
                             compare_fixture, enumerate_families, golden_fixtures,
                             observe_fixture, sweep)

from conftest import brute_orbit_key


def brute_orbit_count(n, s_max):
    subsets = range(1, full_set(n) + 1)
    keys = set()
    for s in range(1, s_max + 1):
        for combo in itertools.combinations(subsets, s):
            if any(a & b == a for a in combo for b in combo if a != b):
                continue
            keys.add(brute_orbit_key(family_from_masks(n, combo)))
    return len(keys)


def test_enumerate_small_cases():
    fams = list(enumerate_families(2, 2))
    assert [F.to_lists() for F in fams] == [[[1]], [[1, 2]], [[1], [2]]]
    assert len(list(enumerate_families(1, 5))) == 1
    for n in range(1, 6):
        assert len(list(enumerate_families(n, 1))) == n


@pytest.mark.parametrize("n, s_max", [(3, 3), (3, 4), (4, 2), (4, 3)])
def test_enumerate_matches_brute_force_orbits(n, s_max):
    fams = list(enumerate_families(n, s_max))
    assert len(fams) == brute_orbit_count(n, s_max)
    assert len({brute_orbit_key(F) for F in fams}) == len(fams)


def test_enumerate_is_deterministic():
    assert list(enumerate_families(4, 3)) == list(enumerate_families(4, 3))


def test_enumerate_cap():
    with pytest.raises(StanleyLabError):
        enumerate_families(7, 2)
    assert len(list(enumerate_families(7, 1, force=True))) == 7


def test_check_instance_examples():
    section1 = golden_fixtures()["example-section1"].family
    v = check_instance(section1, exact=False)
    assert v.status is Status.PROVED and v.depth_ideal == 2 and v.bound.value >= 2

    hin = golden_fixtures()["example-hin"].family
    v = check_instance(hin)
    assert v.status is Status.PROVED and v.bound.value >= 4 and v.depth_ideal == 4

    v = check_instance(reduce_family(4, [[1, 2], [3, 4]]))
    assert v.status is Status.PROVED_EXACT and v.depth_ideal == 2 and v.exact == 3


@pytest.mark.parametrize("name", sorted(golden_fixtures()))
def test_fixtures_reproduce(name):
    fx = golden_fixtures()[name]
    assert compare_fixture(fx, observe_fixture(fx)) == []


def test_compare_fixture_reports_mismatch():
    fx = golden_fixtures()["example-section1"]
    got = dict(observe_fixture(fx), size=7)
    assert compare_fixture(fx, got) == ["size: expected 1, got 7"]


def test_audit_counts_checks():
    out = audit_family(reduce_family(4, [[1, 2], [3, 4]]))
    assert out.families == 1
    assert out.statuses[Status.PROVED_EXACT] == 1
    assert out.splits_verified > 0
    assert out.ok


def test_strict_size_reading_is_advisory():
    # size 1 with depth S/I = 1 breaks "depth S/I >= size + 1" but not the sweep
    out = audit_family(golden_fixtures()["example-section1"].family)
    assert [f[0] for f in out.failures] == ["depth_above_size"]
    assert out.ok
    assert out.to_dict()["advisory"] == {"depth_above_size": 1}


def test_summary_merge_is_order_independent():
    parts = [audit_family(F) for F in enumerate_families(3, 3)]
    a = SweepSummary()
    for p in parts:
        a.merge(p)
    b = SweepSummary()
    for p in reversed(parts):
        b.merge(p)
    da, db = a.to_dict(), b.to_dict()
    da["failures"].sort()
    db["failures"].sort()
    assert da == db


def test_sweep_checkpoint_and_resume(tmp_path):
    ckpt = tmp_path / "sweep.ckpt"
    first = sweep(3, 3, checkpoint=ckpt, chunk=3)
    total = first.families
    assert total == sum(1 for n in range(1, 4) for _ in enumerate_families(n, 3))
    assert len(ckpt.read_text().splitlines()) == total

    # drop the last two lines as if the run had been interrupted
    lines = ckpt.read_text().splitlines()
    ckpt.write_text("\n".join(lines[:-2]) + "\n")
    again = sweep(3, 3, checkpoint=ckpt, resume=True)
    assert again.skipped == total - 2 and again.families == 2
    assert sorted(ckpt.read_text().splitlines()) == sorted(lines)


def test_parallel_sweep_matches_serial():
    serial = sweep(4, 3, jobs=1, chunk=10).to_dict()
    parallel = sweep(4, 3, jobs=2, chunk=10).to_dict()
    serial["failures"].sort()
    parallel["failures"].sort()
    assert serial == parallel
