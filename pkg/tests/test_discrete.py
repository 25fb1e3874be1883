import logging
from fractions import Fraction
from itertools import product

import pytest

from conftest import random_antisymmetric
from core.diagram import MINIMIZER_BLOCK_SIZES, Endpoints, minimizer_endpoints, evaluate_f
from core.discrete import (
    Arc,
    CircleColoring,
    Color,
    DiscreteColoring,
    ap_counts,
    bead_fraction,
    circle_mono_fraction,
    circle_monte_carlo,
    count_ap3,
    count_mono_ap3,
    count_mono_offby1,
    count_offby1,
    discretize,
    fraction_mono,
    lipschitz_flip_bound,
    offby1_relation_check,
    random_baseline,
)

logger = logging.getLogger(__name__)


def _brute_mono(c: DiscreteColoring, offsets) -> int:
    """Ordered triples ``t1, t2, t3`` of one colour with ``t1 + t3 - 2*t2`` in ``offsets``."""
    colors = c.colors
    total = 0
    for t1, t3 in product(range(c.N), repeat=2):
        if colors[t1] is not colors[t3]:
            continue
        for offset in offsets:
            twice = t1 + t3 - offset
            if twice % 2 == 0 and 0 <= twice // 2 < c.N and colors[twice // 2] is colors[t1]:
                total += 1
    return total


def _random_coloring(rng, N: int) -> DiscreteColoring:
    return DiscreteColoring(tuple(rng.choice("RB") for _ in range(N)))


def _random_blocks(rng, blocks: int, N: int) -> DiscreteColoring:
    cuts = sorted(rng.sample(range(1, N), blocks - 1))
    sizes = [b - a for a, b in zip([0, *cuts], [*cuts, N])]
    return DiscreteColoring.from_block_sizes(sizes, first=rng.choice(list(Color)))


def test_parse_and_blocks():
    c = DiscreteColoring.parse("rrBBr")
    assert str(c) == "RRBBR"
    assert c.N == 5
    assert c.block_count() == 3
    assert c.run_lengths() == [2, 2, 1]
    assert DiscreteColoring.from_block_sizes([2, 0, 1]) == DiscreteColoring.parse("RRR")
    assert DiscreteColoring.from_block_sizes([1, 2], first=Color.BLUE) == DiscreteColoring.parse("BRR")
    with pytest.raises(ValueError):
        DiscreteColoring.parse("RGB")
    with pytest.raises(ValueError):
        DiscreteColoring.parse("")
    with pytest.raises(ValueError):
        DiscreteColoring.from_block_sizes([2, -1])


@pytest.mark.parametrize("N, total", [(1, 1), (2, 2), (3, 5), (4, 8)])
def test_count_ap3_examples(N, total):
    assert count_ap3(N) == total


def test_totals_match_brute_force():
    for N in range(1, 201):
        red = DiscreteColoring(("R",) * N)
        assert count_ap3(N) == _brute_mono(red, (0,))
        assert count_offby1(N) == _brute_mono(red, (1, -1))
    with pytest.raises(ValueError):
        count_ap3(0)
    with pytest.raises(ValueError):
        count_offby1(0)


def test_monochromatic_counts_examples():
    assert count_mono_ap3(DiscreteColoring.parse("RRB")) == 3
    assert count_mono_ap3(DiscreteColoring.parse("RB")) == 2
    assert count_mono_ap3(DiscreteColoring(("R",) * 7)) == count_ap3(7)
    assert count_mono_offby1(DiscreteColoring.parse("RR")) == 4
    assert count_mono_offby1(DiscreteColoring.parse("RB")) == 0
    assert count_mono_offby1(DiscreteColoring.parse("R")) == 0
    assert count_mono_offby1(DiscreteColoring.parse("RRB")) == 4


def test_monochromatic_counts_match_brute_force(rng):
    for _ in range(40):
        c = _random_coloring(rng, rng.randint(1, 60))
        counts = ap_counts(c)
        assert counts.m3 == _brute_mono(c, (0,))
        assert counts.m3_prime == _brute_mono(c, (1, -1))
        assert 0 <= counts.m3 <= counts.ap3_total
        assert 0 <= counts.m3_prime <= counts.offby1_total


def test_colour_swap_invariance(rng):
    for _ in range(20):
        c = _random_coloring(rng, rng.randint(1, 40))
        assert ap_counts(c.swapped()) == ap_counts(c)
        assert bead_fraction(c.swapped()) == bead_fraction(c)


def test_fraction_mono():
    assert fraction_mono(DiscreteColoring.parse("RRB")) == Fraction(3, 5)
    assert fraction_mono(DiscreteColoring.parse("RRRR")) == 1


@pytest.mark.parametrize(
    "text, value",
    [("RB", Fraction(1, 2)), ("R", Fraction(1)), ("RR", Fraction(1)), ("RRB", Fraction(5, 9))],
)
def test_bead_fraction_examples(text, value):
    assert bead_fraction(DiscreteColoring.parse(text)) == value


def test_bead_fraction_equals_block_measure():
    # Every colouring of [N] for small N, against the continuous evaluator
    for N in range(1, 11):
        for colors in product("RB", repeat=N):
            c = DiscreteColoring(colors)
            assert bead_fraction(c) == evaluate_f(c.to_endpoints()), str(c)


def test_to_endpoints_merges_runs():
    assert DiscreteColoring.parse("RRB").to_endpoints() == Endpoints.parse("0,2/3,1")
    assert DiscreteColoring.parse("BBBB").to_endpoints() == Endpoints((0, 1))


def test_discretize_minimizer():
    c = discretize(minimizer_endpoints(), 548)
    assert c == DiscreteColoring.from_block_sizes(MINIMIZER_BLOCK_SIZES)
    assert c.run_lengths() == list(MINIMIZER_BLOCK_SIZES)
    assert discretize(minimizer_endpoints(), 548, first=Color.BLUE) == c.swapped()


def test_discretize_boundary_midpoint_goes_left():
    half = Endpoints.parse("0,1/2,1")
    assert str(discretize(half, 4)) == "RRBB"
    assert str(discretize(half, 3)) == "RRB"
    assert str(discretize(half, 1)) == "R"
    with pytest.raises(ValueError):
        discretize(half, 0)


def test_discretisation_converges():
    # At most six runs per colour: |m3' - 2 m3| <= 4 (6^2 + 6^2), so counting adds at most 144 / N to N * |error|
    exact = Fraction(117, 548)
    e = minimizer_endpoints()
    for N in (100, 137, 274, 500, 1000):
        c = discretize(e, N)
        assert N * abs(bead_fraction(c) - exact) <= 1, N
        assert N * abs(fraction_mono(c) - exact) <= 3, N
    assert bead_fraction(discretize(e, 1096)) == exact
    coarse = abs(fraction_mono(discretize(e, 548)) - exact)
    fine = abs(fraction_mono(discretize(e, 5480)) - exact)
    assert coarse > 0
    assert fine <= coarse / 8


def test_discretisation_of_random_colouring_converges(rng):
    # Seven inner boundaries, each misplaced by at most half a bead
    e = random_antisymmetric(rng, 8)
    exact = evaluate_f(e)
    for N in (64, 256, 1024):
        c = discretize(e, N)
        assert N * abs(bead_fraction(c) - exact) <= 14, N
        assert N * abs(fraction_mono(c) - exact) <= 16, N


def test_offby1_relation_small():
    relation = offby1_relation_check(DiscreteColoring.parse("RR"))
    assert (relation.m3_prime, relation.twice_m3, relation.defect) == (4, 4, 0)
    relation = offby1_relation_check(DiscreteColoring.parse("RRR"))
    assert relation.defect == 8 - 10


def test_offby1_relation_corpus(rng):
    worst = Fraction(0)
    for _ in range(60):
        N = rng.randint(12, 2000)
        c = _random_blocks(rng, rng.randint(1, 12), N)
        relation = offby1_relation_check(c)
        worst = max(worst, Fraction(abs(relation.defect), c.block_count() * N))
    alternating = DiscreteColoring(tuple("RB" * 10))
    worst = max(worst, Fraction(abs(offby1_relation_check(alternating).defect), 20 * 20))
    logger.info(f"Off-by-1 constant over the corpus: {float(worst):.4f}")
    assert worst <= 4


def test_lipschitz_flip_bound(rng):
    for _ in range(15):
        bound = lipschitz_flip_bound(_random_coloring(rng, rng.randint(1, 30)))
        assert bound.holds, bound


def test_random_baseline():
    assert random_baseline() == Fraction(1, 4)


@pytest.mark.parametrize(
    "p, value",
    [(Fraction(0), 1), (Fraction(1), 1), (Fraction(1, 2), Fraction(1, 4)), (Fraction(1, 3), Fraction(1, 3))],
)
def test_circle_formula(p, value):
    assert circle_mono_fraction(p) == value


def test_circle_formula_domain():
    with pytest.raises(ValueError):
        circle_mono_fraction(Fraction(3, 2))
    with pytest.raises(ValueError):
        circle_mono_fraction(Fraction(-1, 5))


@pytest.mark.parametrize("p", [Fraction(0), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)])
@pytest.mark.parametrize("offset", [Fraction(0), Fraction(3, 8)])
def test_circle_monte_carlo(p, offset):
    estimate = circle_monte_carlo(CircleColoring.two_arc(p, offset), samples=1_000_000, seed=11)
    assert estimate.exact == circle_mono_fraction(p)
    assert estimate.within(4.0), estimate.to_json()


def test_circle_monte_carlo_many_arcs():
    arcs = CircleColoring(
        (
            Arc(Fraction(0), Fraction(1, 5), Color.RED),
            Arc(Fraction(1, 5), Fraction(1, 10), Color.BLUE),
            Arc(Fraction(3, 10), Fraction(2, 5), Color.RED),
            Arc(Fraction(7, 10), Fraction(3, 10), Color.BLUE),
        )
    )
    assert arcs.red_measure == Fraction(3, 5)
    estimate = circle_monte_carlo(arcs, samples=500_000, seed=3)
    assert estimate.within(4.0), estimate.to_json()


def test_monte_carlo_is_reproducible():
    c = CircleColoring.two_arc(Fraction(1, 3))
    first = circle_monte_carlo(c, samples=50_000, seed=5)
    assert circle_monte_carlo(c, samples=50_000, seed=5) == first
    with pytest.raises(ValueError):
        circle_monte_carlo(c, samples=0, seed=5)


def test_circle_coloring_validation():
    with pytest.raises(ValueError):
        CircleColoring(())
    with pytest.raises(ValueError):
        CircleColoring((Arc(Fraction(0), Fraction(1, 2), Color.RED),))
    with pytest.raises(ValueError):
        CircleColoring(
            (Arc(Fraction(0), Fraction(1, 2), Color.RED), Arc(Fraction(3, 5), Fraction(1, 2), Color.BLUE))
        )


def test_circle_coloring_json():
    c = CircleColoring.two_arc(Fraction(1, 4), Fraction(7, 8))
    data = c.to_json()
    assert data[0] == {"start": "1/8", "length": "3/4", "color": "B"}
    assert CircleColoring.from_json(data) == c
    assert CircleColoring.from_json([{"start": 0, "length": 1, "color": "R"}]).red_measure == 1
