"""
Region geometry of the progression diagram.

A 3-AP ``(s, (s+t)/2, t)`` of [0, 1] is a point ``(s, t)`` of the unit square. For a
block colouring with endpoints ``x_0 < ... < x_n`` the square is cut by the strips
``x_i <= s < x_{i+1}``, ``x_j <= t < x_{j+1}`` and the antidiagonal strips
``2x_k <= s + t < 2x_{k+1}``. Each triple ``(i, j, k)`` leaves a polygon whose shape
falls into one of twenty cases; its area is a quadratic in the endpoints.

Area formulas are written once and evaluated polymorphically: with ``Fraction``
endpoints they give numbers, with ``LinearExpr`` endpoints they give quadratic forms.
"""

import logging
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from itertools import accumulate, product
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

from core.exact import LinearExpr, QuadraticForm, format_rational, parse_rational


logger = logging.getLogger(__name__)

MINIMIZER_BLOCK_SIZES = (28, 6, 28, 37, 59, 116, 116, 59, 37, 28, 6, 28)
MINIMIZER_DENOMINATOR = 548
MINIMUM_VALUE = Fraction(117, 548)


class TieError(ValueError):
    """A pair sum lands exactly on a doubled endpoint."""

    def __init__(self, i: int, j: int, k: int):
        self.triple = (i, j, k)
        super().__init__(f"Tie: x{i} + x{j} equals 2*x{k}")


class InconsistentConfigurationError(RuntimeError):
    """The comparisons implied by a configuration match no region shape."""


@dataclass(frozen=True)
class Endpoints:
    """Block boundaries ``(x_0, ..., x_n)`` with ``x_0 = 0`` and ``x_n = 1``."""

    x: Tuple[Fraction, ...]

    def __post_init__(self):
        x = tuple(Fraction(v) for v in self.x)
        if len(x) < 2:
            raise ValueError("Endpoints need at least x0 and x1")
        if x[0] != 0 or x[-1] != 1:
            raise ValueError("Endpoints must start at 0 and end at 1")
        for left, right in zip(x, x[1:]):
            if right < left:
                raise ValueError(
                    f"Endpoints must be non-decreasing ({format_rational(left)} > {format_rational(right)})"
                )
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return len(self.x) - 1

    @property
    def is_strict(self) -> bool:
        return all(left < right for left, right in zip(self.x, self.x[1:]))

    @property
    def antisymmetric(self) -> bool:
        return all(self.x[k] + self.x[self.n - k] == 1 for k in range(self.n + 1))

    @classmethod
    def from_free(cls, n: int, free: Sequence[Fraction]) -> "Endpoints":
        """Rebuild the antisymmetric endpoints from ``x_1 .. x_{n/2-1}``."""
        if n == 0:
            return cls((Fraction(0), Fraction(1)))
        if n % 2:
            raise ValueError(f"Antisymmetric endpoints need an even block count, got {n}")
        free = [Fraction(v) for v in free]
        if len(free) != n // 2 - 1:
            raise ValueError(f"n={n} has {n // 2 - 1} free variables, got {len(free)}")
        point = {v: value for v, value in enumerate(free, start=1)}
        return cls(tuple(endpoint_expr(n, v).evaluate(point) for v in range(n + 1)))

    @classmethod
    def parse(cls, text: str) -> "Endpoints":
        return cls(tuple(parse_rational(part) for part in text.split(",") if part.strip()))

    def free(self) -> Dict[int, Fraction]:
        if not self.antisymmetric:
            raise ValueError("Free variables are only defined for antisymmetric endpoints")
        if self.n == 1:
            return {}
        return {v: self.x[v] for v in range(1, self.n // 2)}

    def mirrored(self) -> "Endpoints":
        """Reflection about 1/2, which swaps the two colours."""
        return Endpoints(tuple(1 - v for v in reversed(self.x)))

    def to_text(self) -> str:
        return ",".join(format_rational(v) for v in self.x)


def minimizer_endpoints() -> Endpoints:
    """The 12-block certificate colouring."""
    cumulative = accumulate(MINIMIZER_BLOCK_SIZES, initial=0)
    return Endpoints(tuple(Fraction(s, MINIMIZER_DENOMINATOR) for s in cumulative))


def endpoint_expr(n: int, v: int) -> LinearExpr:
    """
    Endpoint ``x_v`` expressed in the free variables of an antisymmetric colouring.

    ``x_0 = 0``, ``x_n = 1``, ``x_{n/2} = 1/2`` and ``x_{n-v} = 1 - x_v``; what remains
    is ``x_1 .. x_{n/2-1}``.
    """
    if not 0 <= v <= n:
        raise ValueError(f"Endpoint index {v} outside 0..{n}")
    if v == 0:
        return LinearExpr.const(0)
    if v == n:
        return LinearExpr.const(1)
    if 2 * v == n:
        return LinearExpr.const(Fraction(1, 2))
    if 2 * v < n:
        return LinearExpr.variable(v)
    return 1 - LinearExpr.variable(n - v)


def config_pairs(n: int) -> List[Tuple[int, int]]:
    """Pairs ``i < j <= n`` whose sum is not pinned to 1 by antisymmetry."""
    return [(i, j) for i in range(n + 1) for j in range(i + 1, n + 1) if i + j != n]


@dataclass(frozen=True)
class Configuration:
    """
    One chamber: ``kappa[(i, j)] = k`` means ``2x_k < x_i + x_j < 2x_{k+1}``.

    Serialised as ``i,j:k`` entries joined by ``;`` in lexicographic pair order.
    """

    n: int
    kappa: Mapping[Tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        kappa = {}
        for (i, j), k in sorted(self.kappa.items()):
            if not 0 <= i < j <= self.n or i + j == self.n:
                raise ValueError(f"Pair ({i}, {j}) is not a configuration pair for n={self.n}")
            if not i <= k <= j - 1:
                raise ValueError(f"kappa({i}, {j}) = {k} outside [{i}, {j - 1}]")
            kappa[(i, j)] = k
        object.__setattr__(self, "kappa", kappa)

    def __getitem__(self, pair: Tuple[int, int]) -> int:
        return self.kappa[pair]

    def __len__(self) -> int:
        return len(self.kappa)

    def is_complete(self) -> bool:
        return len(self.kappa) == len(config_pairs(self.n))

    def mirror(self) -> "Configuration":
        return Configuration(
            self.n, {(self.n - j, self.n - i): self.n - 1 - k for (i, j), k in self.kappa.items()}
        )

    def serialize(self) -> str:
        return ";".join(f"{i},{j}:{k}" for (i, j), k in self.kappa.items())

    @classmethod
    def parse(cls, n: int, text: str) -> "Configuration":
        kappa = {}
        text = text.strip()
        if text:
            for entry in text.split(";"):
                try:
                    pair, k = entry.split(":")
                    i, j = pair.split(",")
                    kappa[(int(i), int(j))] = int(k)
                except ValueError as e:
                    raise ValueError(f"Malformed configuration entry {entry!r}") from e
        return cls(n, kappa)


class Band(IntEnum):
    """Where the line ``s + t = T`` cuts a rectangle, ordered by increasing ``T``."""

    BELOW = 0
    LOWER = 1
    MID_I = 2
    MID_J = 3
    UPPER = 4
    ABOVE = 5


_CASE_IDS: Dict[Tuple[Band, Band], int] = {
    (Band.BELOW, Band.ABOVE): 1,
    (Band.LOWER, Band.ABOVE): 2,
    (Band.MID_I, Band.ABOVE): 3,
    (Band.MID_J, Band.ABOVE): 4,
    (Band.UPPER, Band.ABOVE): 5,
    (Band.BELOW, Band.UPPER): 6,
    (Band.LOWER, Band.UPPER): 7,
    (Band.MID_I, Band.UPPER): 8,
    (Band.MID_J, Band.UPPER): 9,
    (Band.UPPER, Band.UPPER): 10,
    (Band.BELOW, Band.MID_I): 11,
    (Band.LOWER, Band.MID_I): 12,
    (Band.MID_I, Band.MID_I): 13,
    (Band.BELOW, Band.MID_J): 14,
    (Band.LOWER, Band.MID_J): 15,
    (Band.MID_J, Band.MID_J): 16,
    (Band.BELOW, Band.LOWER): 17,
    (Band.LOWER, Band.LOWER): 18,
    (Band.BELOW, Band.BELOW): 19,
    (Band.ABOVE, Band.ABOVE): 20,
}


@dataclass(frozen=True)
class RegionCase:
    case_id: int

    def __post_init__(self):
        if not 1 <= self.case_id <= 20:
            raise ValueError(f"Region case must be in 1..20, got {self.case_id}")

    @property
    def is_empty(self) -> bool:
        return self.case_id >= 19


def band_from_flags(le0: bool, le1: bool, le2: bool, le3: bool) -> Band:
    """
    Band of a threshold ``T`` given the corner comparisons ``corner_s <= T``.

    Corners are ``x_i + x_j``, ``x_i + x_{j+1}``, ``x_{i+1} + x_j``, ``x_{i+1} + x_{j+1}``.
    """
    if ((le1 or le2) and not le0) or (le3 and not (le1 and le2)):
        raise InconsistentConfigurationError(
            f"Corner comparisons are not monotone: {(le0, le1, le2, le3)}"
        )
    if not le0:
        return Band.BELOW
    if le3:
        return Band.ABOVE
    if le1 and le2:
        return Band.UPPER
    if le2:
        return Band.MID_I
    if le1:
        return Band.MID_J
    return Band.LOWER


def case_from_bands(low: Band, high: Band) -> RegionCase:
    if high is Band.BELOW:
        return RegionCase(19)
    case_id = _CASE_IDS.get((low, high))
    if case_id is None:
        raise InconsistentConfigurationError(
            f"No region shape between bands {low.name} and {high.name}"
        )
    return RegionCase(case_id)


def _pair_at_most(cfg: Configuration, a: int, b: int, k: int) -> bool:
    """Whether ``x_a + x_b <= 2x_k`` under ``cfg`` (ties count as ``<=``)."""
    if a > b:
        a, b = b, a
    if a == b:
        return a <= k
    if a + b == cfg.n:
        return 2 * k >= cfg.n
    try:
        return cfg.kappa[(a, b)] < k
    except KeyError:
        raise ValueError(f"Configuration is missing pair ({a}, {b})") from None


def classify_region(i: int, j: int, k: int, cfg: Configuration) -> RegionCase:
    n = cfg.n
    if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
        raise ValueError(f"Strip indices ({i}, {j}, {k}) outside 0..{n - 1}")

    def band(level: int) -> Band:
        return band_from_flags(
            _pair_at_most(cfg, i, j, level),
            _pair_at_most(cfg, i, j + 1, level),
            _pair_at_most(cfg, i + 1, j, level),
            _pair_at_most(cfg, i + 1, j + 1, level),
        )

    return case_from_bands(band(k), band(k + 1))


def _numeric_band(x: Sequence[Fraction], i: int, j: int, level: Fraction) -> Band:
    return band_from_flags(
        x[i] + x[j] <= level,
        x[i] + x[j + 1] <= level,
        x[i + 1] + x[j] <= level,
        x[i + 1] + x[j + 1] <= level,
    )


def _sq(value):
    return value * value


# Region areas with a = x_i, b = x_{i+1}, c = x_j, d = x_{j+1}, p = x_k, q = x_{k+1}
_AREA: Dict[int, Callable] = {
    1: lambda a, b, c, d, p, q: (b - a) * (d - c),
    2: lambda a, b, c, d, p, q: (b - a) * (d - c) - _sq(2 * p - a - c) / 2,
    3: lambda a, b, c, d, p, q: (b - a) * (d + a / 2 + b / 2 - 2 * p),
    4: lambda a, b, c, d, p, q: (d - c) * (b + c / 2 + d / 2 - 2 * p),
    5: lambda a, b, c, d, p, q: _sq(2 * p - b - d) / 2,
    6: lambda a, b, c, d, p, q: (b - a) * (d - c) - _sq(2 * q - d - b) / 2,
    7: lambda a, b, c, d, p, q: (
        (b - a) * (d - c) - _sq(2 * p - a - c) / 2 - _sq(2 * q - b - d) / 2
    ),
    8: lambda a, b, c, d, p, q: (
        (b - a) * (d + a / 2 + b / 2 - 2 * p) - _sq(2 * q - b - d) / 2
    ),
    9: lambda a, b, c, d, p, q: (
        (d - c) * (b + c / 2 + d / 2 - 2 * p) - _sq(2 * q - b - d) / 2
    ),
    10: lambda a, b, c, d, p, q: _sq(2 * p - b - d) / 2 - _sq(2 * q - b - d) / 2,
    11: lambda a, b, c, d, p, q: (b - a) * (2 * q - c - a / 2 - b / 2),
    12: lambda a, b, c, d, p, q: (
        (b - a) * (2 * q - c - a / 2 - b / 2) - _sq(2 * p - a - c) / 2
    ),
    13: lambda a, b, c, d, p, q: (b - a) * (2 * q - 2 * p),
    14: lambda a, b, c, d, p, q: (d - c) * (2 * q - c / 2 - d / 2 - a),
    15: lambda a, b, c, d, p, q: (
        (d - c) * (2 * q - c / 2 - d / 2 - a) - _sq(2 * p - a - c) / 2
    ),
    16: lambda a, b, c, d, p, q: (d - c) * (2 * q - 2 * p),
    17: lambda a, b, c, d, p, q: _sq(2 * q - a - c) / 2,
    18: lambda a, b, c, d, p, q: _sq(2 * q - a - c) / 2 - _sq(2 * p - a - c) / 2,
    19: lambda a, b, c, d, p, q: 0,
    20: lambda a, b, c, d, p, q: 0,
}


def _area(case: RegionCase, x: Sequence, i: int, j: int, k: int):
    return _AREA[case.case_id](x[i], x[i + 1], x[j], x[j + 1], x[k], x[k + 1])


def region_area_form(case: RegionCase, i: int, j: int, k: int, n: int) -> QuadraticForm:
    """Area of the ``(i, j, k)`` region as a quadratic in ``x_0 .. x_n``."""
    if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
        raise ValueError(f"Strip indices ({i}, {j}, {k}) outside 0..{n - 1}")
    x = [LinearExpr.variable(v) for v in range(n + 1)]
    return QuadraticForm.coerce(_area(case, x, i, j, k))


def _mono_triples(n: int):
    return ((i, j, k) for i, j, k in product(range(n), repeat=3) if i % 2 == j % 2 == k % 2)


def mono_fraction_form(cfg: Configuration, reduce: bool = True) -> QuadraticForm:
    """
    Monochromatic measure on the chamber ``cfg`` as one quadratic piece.

    Args:
        cfg: A complete configuration
        reduce: Express the form in the free variables ``x_1 .. x_{n/2-1}`` (default)
            instead of all of ``x_0 .. x_n``

    Returns:
        The exact quadratic piece
    """
    n = cfg.n
    if n == 0:
        return QuadraticForm.coerce(1)
    if not cfg.is_complete():
        raise ValueError(f"Configuration for n={n} is incomplete ({len(cfg)} pairs)")
    if reduce:
        x = [endpoint_expr(n, v) for v in range(n + 1)]
    else:
        x = [LinearExpr.variable(v) for v in range(n + 1)]

    pieces = []
    for i, j, k in _mono_triples(n):
        case = classify_region(i, j, k, cfg)
        if not case.is_empty:
            pieces.append(_area(case, x, i, j, k))
    return QuadraticForm.sum(pieces)


def _numeric_case(x: Sequence[Fraction], i: int, j: int, k: int) -> RegionCase:
    return case_from_bands(
        _numeric_band(x, i, j, 2 * x[k]), _numeric_band(x, i, j, 2 * x[k + 1])
    )


def evaluate_f(e: Endpoints) -> Fraction:
    """Monochromatic measure of the block colouring ``e``, by direct comparison."""
    x = e.x
    total = Fraction(0)
    for i, j, k in _mono_triples(e.n):
        total += _area(_numeric_case(x, i, j, k), x, i, j, k)
    return Fraction(total)


def total_area_check(e: Endpoints) -> Fraction:
    """Sum of every region area over all ordered triples; equals 1 for any ``e``."""
    x = e.x
    total = Fraction(0)
    for i, j, k in product(range(e.n), repeat=3):
        total += _area(_numeric_case(x, i, j, k), x, i, j, k)
    return Fraction(total)


def derive_configuration(e: Endpoints) -> Configuration:
    """
    The chamber containing the antisymmetric, strictly increasing endpoints ``e``.

    Raises:
        TieError: Some ``x_i + x_j`` equals a doubled endpoint
    """
    if not e.antisymmetric:
        raise ValueError("derive_configuration needs antisymmetric endpoints")
    if not e.is_strict:
        raise ValueError("derive_configuration needs strictly increasing endpoints")
    if e.n == 1:
        return Configuration(0)
    if e.n % 2:
        raise ValueError(f"Antisymmetric chambers need an even block count, got {e.n}")
    x = e.x
    kappa = {}
    for i, j in config_pairs(e.n):
        total = x[i] + x[j]
        for k in range(i, j):
            if total == 2 * x[k]:
                raise TieError(i, j, k)
            if total < 2 * x[k + 1]:
                kappa[(i, j)] = k
                break
    return Configuration(e.n, kappa)
