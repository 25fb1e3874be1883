import os
import random
from fractions import Fraction
from typing import Dict, List

import pytest

from core.diagram import Configuration, Endpoints
from core.enumerator import enumerate_configurations


def pytest_collection_modifyitems(config, items):
    if os.getenv("MONOAP_RUN_SLOW", "0") == "1":
        return
    skip_slow = pytest.mark.skip(reason="long-running; set MONOAP_RUN_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


@pytest.fixture(scope="session")
def chambers() -> Dict[int, List[Configuration]]:
    """Enumerated configurations for the desk-scale block counts."""
    return {n: enumerate_configurations(n).configurations for n in (0, 2, 4, 6)}


def random_antisymmetric(rng: random.Random, n: int, scale: int = 10**12) -> Endpoints:
    """
    Strictly increasing antisymmetric endpoints. With this many possible numerators an
    exact tie ``x_i + x_j = 2x_k`` practically never happens.
    """
    half = n // 2 - 1
    while True:
        picks = sorted(rng.randrange(1, scale) for _ in range(half))
        if len(set(picks)) == half:
            return Endpoints.from_free(n, [Fraction(p, 2 * scale) for p in picks])


def random_monotone(rng: random.Random, n: int, denominator: int = 97) -> Endpoints:
    """Non-decreasing endpoints, repeated values allowed."""
    inner = sorted(Fraction(rng.randrange(0, denominator + 1), denominator) for _ in range(n - 1))
    return Endpoints((Fraction(0), *inner, Fraction(1)))


def _ramp(u):
    return u * u / 2 if u > 0 else 0 * u


def below_line_area(a, b, c, d, T):
    """Area of ``{(s, t) in [a, b] x [c, d] : s + t <= T}`` by inclusion-exclusion."""
    return _ramp(T - a - c) - _ramp(T - a - d) - _ramp(T - b - c) + _ramp(T - b - d)


def oracle_region_area(x, i: int, j: int, k: int):
    """Area of the ``(i, j, k)`` region computed without any case analysis."""
    a, b, c, d = x[i], x[i + 1], x[j], x[j + 1]
    return below_line_area(a, b, c, d, 2 * x[k + 1]) - below_line_area(a, b, c, d, 2 * x[k])


def oracle_f(x):
    n = len(x) - 1
    return sum(
        oracle_region_area(x, i, j, k)
        for i in range(n)
        for j in range(i % 2, n, 2)
        for k in range(i % 2, n, 2)
    )
