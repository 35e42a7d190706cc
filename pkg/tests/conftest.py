import itertools

import pytest
from hypothesis import strategies as st

from stanley_lab.core import PrimeFamily, family_from_masks, full_set

_REPORT: list[str] = []


@st.composite
def families(draw, n_min=1, n_max=6, s_max=4):
    n = draw(st.integers(n_min, n_max))
    masks = draw(st.lists(st.integers(1, full_set(n)), min_size=1, max_size=s_max))
    return family_from_masks(n, masks)


def in_ideal(F: PrimeFamily, sigma: int) -> bool:
    return all(sigma & p for p in F.primes)


def brute_orbit_key(F: PrimeFamily) -> tuple:
    """Lexicographically least sorted image over all variable permutations."""
    best = None
    for perm in itertools.permutations(range(F.n)):
        image = []
        for p in F.primes:
            m = 0
            for b in range(F.n):
                if p >> b & 1:
                    m |= 1 << perm[b]
            image.append(m)
        key = tuple(sorted(image))
        if best is None or key < best:
            best = key
    return best


@pytest.fixture
def report():
    """Collect one summary line per acceptance criterion."""
    return _REPORT.append


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
