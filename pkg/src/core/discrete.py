"""
Discrete colourings of [N]: exact 3-AP and off-by-1 counts, the bead formula,
discretisation of block colourings, circle colourings and seeded Monte Carlo checks.

Counts are exact integers. For each colour class with indicator ``v`` the self
convolution ``conv[s]`` counts ordered pairs ``(t1, t3)`` of that colour with
``t1 + t3 = s``, so

* monochromatic 3-APs are ``sum_m v[m] * conv[2m]`` (``d`` may be zero or negative)
* monochromatic off-by-1 triples are ``sum_m v[m] * (conv[2m - 1] + conv[2m + 1])``
"""

import logging
import math
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import accumulate
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.diagram import Endpoints, evaluate_f
from core.exact import format_rational, parse_rational


logger = logging.getLogger(__name__)

# Monte Carlo samples are integers u in [0, 2**SAMPLE_BITS), standing for u / 2**SAMPLE_BITS
SAMPLE_BITS = 32
CHUNK_SIZE = 1 << 20


class Color(str, Enum):
    RED = "R"
    BLUE = "B"

    def swapped(self) -> "Color":
        return Color.BLUE if self is Color.RED else Color.RED


@dataclass(frozen=True)
class DiscreteColoring:
    colors: Tuple[Color, ...]

    def __post_init__(self):
        colors = tuple(Color(c) for c in self.colors)
        if not colors:
            raise ValueError("A colouring of [N] needs N >= 1")
        object.__setattr__(self, "colors", colors)

    @classmethod
    def parse(cls, text: str) -> "DiscreteColoring":
        text = text.strip().upper()
        bad = set(text) - {"R", "B"}
        if bad:
            raise ValueError(f"Colouring may only contain R and B, found {''.join(sorted(bad))!r}")
        return cls(tuple(text))

    @classmethod
    def from_block_sizes(cls, sizes: Sequence[int], first: Color = Color.RED) -> "DiscreteColoring":
        """Alternating blocks of the given integer sizes, starting with ``first``."""
        colors: List[Color] = []
        color = Color(first)
        for size in sizes:
            if size < 0:
                raise ValueError(f"Block sizes must be non-negative, got {size}")
            colors.extend([color] * size)
            color = color.swapped()
        return cls(tuple(colors))

    @property
    def N(self) -> int:
        return len(self.colors)

    def __str__(self) -> str:
        return "".join(c.value for c in self.colors)

    def block_count(self) -> int:
        return 1 + sum(a != b for a, b in zip(self.colors, self.colors[1:]))

    def swapped(self) -> "DiscreteColoring":
        return DiscreteColoring(tuple(c.swapped() for c in self.colors))

    def flipped(self, index: int) -> "DiscreteColoring":
        colors = list(self.colors)
        colors[index] = colors[index].swapped()
        return DiscreteColoring(tuple(colors))

    def run_lengths(self) -> List[int]:
        lengths = [1]
        for a, b in zip(self.colors, self.colors[1:]):
            if a == b:
                lengths[-1] += 1
            else:
                lengths.append(1)
        return lengths

    def to_endpoints(self) -> Endpoints:
        """The block colouring of [0, 1] with one block per colour run of this colouring."""
        cumulative = accumulate(self.run_lengths(), initial=0)
        return Endpoints(tuple(Fraction(s, self.N) for s in cumulative))

    def indicator(self, color: Color) -> np.ndarray:
        return np.fromiter((c is color for c in self.colors), dtype=np.int64, count=self.N)


@dataclass(frozen=True)
class APCounts:
    N: int
    ap3_total: int
    m3: int
    offby1_total: int
    m3_prime: int


def _ap_count(v: np.ndarray) -> int:
    conv = np.convolve(v, v)
    return int(np.dot(v, conv[0::2]))


def _offby1_count(v: np.ndarray) -> int:
    conv = np.convolve(v, v)
    # conv has 2N - 1 entries; odd sums 2m - 1 and 2m + 1 for m = 0..N-1
    odd = np.concatenate(([0], conv[1::2], [0]))
    return int(np.dot(v, odd[:-1] + odd[1:]))


def count_ap3(N: int) -> int:
    """Number of ``(a, d)`` with ``a, a + d, a + 2d`` all in [N]."""
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    return (N + 1) // 2 * ((N + 1) // 2) + (N // 2) * (N // 2)


def count_offby1(N: int) -> int:
    """Number of triples in [N]^3 with ``t1 + t3 - 2*t2 = +-1``."""
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    return _offby1_count(np.ones(N, dtype=np.int64))


def count_mono_ap3(c: DiscreteColoring) -> int:
    return sum(_ap_count(c.indicator(color)) for color in Color)


def count_mono_offby1(c: DiscreteColoring) -> int:
    return sum(_offby1_count(c.indicator(color)) for color in Color)


def ap_counts(c: DiscreteColoring) -> APCounts:
    return APCounts(
        N=c.N,
        ap3_total=count_ap3(c.N),
        m3=count_mono_ap3(c),
        offby1_total=count_offby1(c.N),
        m3_prime=count_mono_offby1(c),
    )


def fraction_mono(c: DiscreteColoring) -> Fraction:
    return Fraction(count_mono_ap3(c), count_ap3(c.N))


def bead_fraction(c: DiscreteColoring) -> Fraction:
    """
    Monochromatic measure of the bead colouring of [0, 1] built from ``c``:
    ``(m3 + m3' / 2) / N^2``.
    """
    return Fraction(2 * count_mono_ap3(c) + count_mono_offby1(c), 2 * c.N * c.N)


def discretize(e: Endpoints, N: int, first: Color = Color.RED) -> DiscreteColoring:
    """
    Colour ``i`` in [N] like the block holding the bead midpoint ``(i - 1/2) / N``.

    A midpoint on a block boundary belongs to the block on its left.
    """
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    second = Color(first).swapped()
    colors = []
    for i in range(1, N + 1):
        block = bisect_left(e.x, Fraction(2 * i - 1, 2 * N)) - 1
        colors.append(first if block % 2 == 0 else second)
    return DiscreteColoring(tuple(colors))


@dataclass(frozen=True)
class OffBy1Relation:
    m3_prime: int
    twice_m3: int
    defect: int


def offby1_relation_check(c: DiscreteColoring) -> OffBy1Relation:
    """Both sides of ``m3' ~ 2 m3`` and their difference ``m3' - 2 m3``."""
    m3_prime = count_mono_offby1(c)
    twice = 2 * count_mono_ap3(c)
    return OffBy1Relation(m3_prime, twice, m3_prime - twice)


def random_baseline() -> Fraction:
    """Expected monochromatic fraction under independent fair colouring."""
    return Fraction(1, 4)


@dataclass(frozen=True)
class FlipBound:
    max_change: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.max_change <= self.bound


def lipschitz_flip_bound(c: DiscreteColoring) -> FlipBound:
    """
    Largest change of ``bead_fraction`` from recolouring a single bead.

    Recolouring a set of measure ``eps`` moves the monochromatic measure by at most
    ``4 * eps``; a bead has measure ``1 / N``.
    """
    base = bead_fraction(c)
    change = max(abs(bead_fraction(c.flipped(i)) - base) for i in range(c.N))
    return FlipBound(change, Fraction(4, c.N))


def circle_mono_fraction(p: Fraction) -> Fraction:
    """Monochromatic measure ``1 - 3p + 3p^2`` of any circle colouring with red measure ``p``."""
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {format_rational(p)}")
    return 1 - 3 * p + 3 * p * p


@dataclass(frozen=True)
class Arc:
    start: Fraction
    length: Fraction
    color: Color


@dataclass(frozen=True)
class CircleColoring:
    """Arcs sorted by start that tile the circle [0, 1) without gaps."""

    arcs: Tuple[Arc, ...]

    def __post_init__(self):
        arcs = tuple(
            sorted(
                (Arc(Fraction(a.start), Fraction(a.length), Color(a.color)) for a in self.arcs),
                key=lambda a: a.start,
            )
        )
        if not arcs:
            raise ValueError("A circle colouring needs at least one arc")
        for arc in arcs:
            if not 0 <= arc.start < 1 or arc.length <= 0:
                raise ValueError(f"Bad arc start={arc.start} length={arc.length}")
        if sum(a.length for a in arcs) != 1:
            raise ValueError("Arc lengths must sum to 1")
        for left, right in zip(arcs, arcs[1:]):
            if left.start + left.length != right.start:
                raise ValueError("Arcs must be disjoint and leave no gaps")
        object.__setattr__(self, "arcs", arcs)

    @classmethod
    def two_arc(cls, p: Fraction, offset: Fraction = Fraction(0)) -> "CircleColoring":
        """A red arc of measure ``p`` starting at ``offset`` and a blue arc for the rest."""
        p, offset = Fraction(p), Fraction(offset)
        if p in (0, 1):
            return cls((Arc(Fraction(0), Fraction(1), Color.RED if p == 1 else Color.BLUE),))
        return cls((Arc(offset % 1, p, Color.RED), Arc((offset + p) % 1, 1 - p, Color.BLUE)))

    @classmethod
    def from_json(cls, items: Iterable[dict]) -> "CircleColoring":
        return cls(
            tuple(
                Arc(parse_rational(str(item["start"])), parse_rational(str(item["length"])), Color(item["color"]))
                for item in items
            )
        )

    def to_json(self) -> List[dict]:
        return [
            {"start": format_rational(a.start), "length": format_rational(a.length), "color": a.color.value}
            for a in self.arcs
        ]

    @property
    def red_measure(self) -> Fraction:
        return sum((a.length for a in self.arcs if a.color is Color.RED), Fraction(0))


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int
    exact: Optional[Fraction] = None

    def within(self, sigmas: float = 4.0) -> bool:
        if self.exact is None:
            raise ValueError("No exact value to compare against")
        return abs(self.estimate - float(self.exact)) <= sigmas * self.stderr

    def to_json(self) -> dict:
        data = {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "rng": "numpy PCG64, SeedSequence(seed).spawn per chunk",
        }
        if self.exact is not None:
            data["exact"] = format_rational(self.exact)
        return data


def _thresholds(points: Sequence[Fraction], bits: int) -> np.ndarray:
    """Smallest integer ``u`` with ``u / 2**bits >= point`` for each point."""
    scale = 1 << bits
    return np.array([-((-p.numerator * scale) // p.denominator) for p in points], dtype=np.int64)


def _chunked_hits(samples: int, seed: int, draw) -> int:
    if samples < 1:
        raise ValueError("samples must be at least 1")
    chunks = -(-samples // CHUNK_SIZE)
    children = np.random.SeedSequence(seed).spawn(chunks)
    hits = 0
    for index, child in enumerate(children):
        size = min(CHUNK_SIZE, samples - index * CHUNK_SIZE)
        rng = np.random.default_rng(child)
        hits += draw(rng, size)
    return hits


def _estimate(hits: int, samples: int, seed: int, exact: Optional[Fraction]) -> MonteCarloEstimate:
    p_hat = hits / samples
    stderr = math.sqrt(p_hat * (1 - p_hat) / samples)
    return MonteCarloEstimate(p_hat, stderr, samples, seed, exact)


def circle_monte_carlo(c: CircleColoring, samples: int, seed: int) -> MonteCarloEstimate:
    """
    Estimate the monochromatic measure of ``x, x + d, x + 2d`` (mod 1) with ``x``
    and ``d`` uniform on the circle.
    """
    starts = _thresholds([a.start for a in c.arcs], SAMPLE_BITS)
    red = np.array([a.color is Color.RED for a in c.arcs])
    modulus = np.int64(1 << SAMPLE_BITS)

    def colour(u: np.ndarray) -> np.ndarray:
        # Points before the first start belong to the last arc
        return red[np.searchsorted(starts, u, side="right") - 1]

    def draw(rng: np.random.Generator, size: int) -> int:
        x = rng.integers(0, 1 << SAMPLE_BITS, size=size, dtype=np.int64)
        d = rng.integers(0, 1 << SAMPLE_BITS, size=size, dtype=np.int64)
        a, b, e = colour(x), colour((x + d) % modulus), colour((x + 2 * d) % modulus)
        return int(np.count_nonzero((a == b) & (b == e)))

    hits = _chunked_hits(samples, seed, draw)
    return _estimate(hits, samples, seed, circle_mono_fraction(c.red_measure))


def interval_monte_carlo(e: Endpoints, samples: int, seed: int) -> MonteCarloEstimate:
    """Estimate the monochromatic measure of ``(s, (s+t)/2, t)`` for the block colouring ``e``."""
    starts = _thresholds(e.x[:-1], SAMPLE_BITS)
    starts_mid = _thresholds(e.x[:-1], SAMPLE_BITS + 1)

    def draw(rng: np.random.Generator, size: int) -> int:
        s = rng.integers(0, 1 << SAMPLE_BITS, size=size, dtype=np.int64)
        t = rng.integers(0, 1 << SAMPLE_BITS, size=size, dtype=np.int64)
        a = (np.searchsorted(starts, s, side="right") - 1) % 2
        b = (np.searchsorted(starts_mid, s + t, side="right") - 1) % 2
        c = (np.searchsorted(starts, t, side="right") - 1) % 2
        return int(np.count_nonzero((a == b) & (b == c)))

    hits = _chunked_hits(samples, seed, draw)
    return _estimate(hits, samples, seed, evaluate_f(e))
