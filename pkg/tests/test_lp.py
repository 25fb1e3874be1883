from fractions import Fraction
from itertools import permutations

import pytest

from core.diagram import endpoint_expr
from core.enumerator import base_constraints, placement_constraints, region_problem
from core.exact import LinearExpr
from core.lp import (
    Constraint,
    LPProblem,
    LPStatus,
    Relation,
    check_feasible_strict,
    maximize,
)

x1, x2, x3 = (LinearExpr.variable(v) for v in (1, 2, 3))


def _assert_feasible(result, slack=None):
    assert result.kind is LPStatus.FEASIBLE, f"expected Feasible, got {result.kind}"
    assert result.slack > 0
    if slack is not None:
        assert result.slack == slack


def _assert_witness_sound(problem: LPProblem, witness):
    assert problem.in_box(witness)
    for constraint in problem.constraints:
        assert constraint.is_satisfied(witness), f"witness violates {constraint}"


def _chain(*exprs) -> tuple:
    return tuple(Constraint.build(a, Relation.LT, b) for a, b in zip(exprs, exprs[1:]))


def _beale() -> LPProblem:
    """Textbook degenerate LP on which the largest-coefficient rule cycles."""
    x4, x5, x6, x7 = (LinearExpr.variable(v) for v in (4, 5, 6, 7))
    constraints = (
        Constraint.build(x4 / 4 - 8 * x5 - x6 + 9 * x7, Relation.LE),
        Constraint.build(x4 / 2 - 12 * x5 - x6 / 2 + 3 * x7, Relation.LE),
        Constraint.build(x6, Relation.LE, 1),
    )
    objective = Fraction(3, 4) * x4 - 20 * x5 + x6 / 2 - 6 * x7
    box = {v: (Fraction(0), None) for v in (4, 5, 6, 7)}
    return LPProblem((4, 5, 6, 7), constraints, objective, box)


def test_constraint_normal_form():
    constraint = Constraint.build(2 * x1, Relation.LT, x2 + 1)
    assert constraint.lhs == LinearExpr({1: 2, 2: -1}, -1)
    assert constraint.is_strict
    assert constraint.closed().relation is Relation.LE
    assert str(constraint) == "2*x1 + -1*x2 + -1 < 0"


def test_strict_chain_slack_one_sixth():
    problem = LPProblem((1, 2), _chain(0, x1, x2, Fraction(1, 2)))
    result = check_feasible_strict(problem)
    _assert_feasible(result, Fraction(1, 6))
    assert result.witness == {1: Fraction(1, 6), 2: Fraction(1, 3)}
    _assert_witness_sound(problem, result.witness)


def test_contradictory_pair_is_infeasible():
    problem = LPProblem(
        (1,),
        (
            Constraint.build(2 * x1, Relation.LT, 1),
            Constraint.build(Fraction(1, 2), Relation.LT, x1),
        ),
    )
    assert check_feasible_strict(problem).kind is LPStatus.INFEASIBLE


def test_strict_constraint_on_box_face_is_infeasible():
    problem = LPProblem((1,), (Constraint.build(x1, Relation.LT, 0),))
    result = check_feasible_strict(problem)
    assert result.kind is LPStatus.INFEASIBLE
    assert result.slack == 0


def test_closed_system_reports_full_slack():
    problem = LPProblem((1,), (Constraint.build(x1, Relation.LE, Fraction(1, 2)),))
    _assert_feasible(check_feasible_strict(problem), Fraction(1))


def test_n4_antisymmetric_placement_is_feasible():
    n = 4
    placement = [
        Constraint.build(2 * endpoint_expr(n, 1), Relation.LT, endpoint_expr(n, 1) + endpoint_expr(n, 2)),
        Constraint.build(endpoint_expr(n, 1) + endpoint_expr(n, 2), Relation.LT, 2 * endpoint_expr(n, 2)),
    ]
    problem = LPProblem((1,), tuple(base_constraints(n)) + tuple(placement))
    result = check_feasible_strict(problem)
    _assert_feasible(result)
    _assert_witness_sound(problem, result.witness)
    assert placement == placement_constraints(n, 1, 2, 1)


def test_maximize_single_bound():
    problem = LPProblem((1,), (Constraint.build(x1, Relation.LE, Fraction(1, 2)),), x1)
    result = maximize(problem)
    assert result.kind is LPStatus.OPTIMAL
    assert result.value == Fraction(1, 2)


def test_maximize_sum():
    problem = LPProblem((1, 2), (Constraint.build(x1 + x2, Relation.LE, 1),), x1 + x2)
    result = maximize(problem)
    assert result.kind is LPStatus.OPTIMAL
    assert result.value == 1
    _assert_witness_sound(problem, result.witness)


def test_epsilon_for_three_variable_chain():
    problem = LPProblem((1, 2, 3), _chain(0, x1, x2, x3, 1))
    result = check_feasible_strict(problem)
    _assert_feasible(result, Fraction(1, 4))
    assert result.witness == {1: Fraction(1, 4), 2: Fraction(1, 2), 3: Fraction(3, 4)}


def test_maximize_with_equality_and_shifted_box():
    problem = LPProblem(
        (1, 2),
        (Constraint.build(x1 + x2, Relation.EQ, 1), Constraint.build(Fraction(3, 4), Relation.LE, x2)),
        x1,
        box={1: (Fraction(-1), Fraction(2)), 2: (Fraction(-1), Fraction(2))},
    )
    result = maximize(problem)
    assert result.value == Fraction(1, 4)
    assert result.witness == {1: Fraction(1, 4), 2: Fraction(3, 4)}


def test_maximize_negative_lower_bound():
    problem = LPProblem((1,), (), -x1, box={1: (Fraction(-1), Fraction(2))})
    result = maximize(problem)
    assert result.value == 1
    assert result.witness == {1: Fraction(-1)}


def test_maximize_unbounded_and_infeasible():
    unbounded = LPProblem((1,), (), x1, box={1: (Fraction(0), None)})
    assert maximize(unbounded).kind is LPStatus.UNBOUNDED
    infeasible = LPProblem((1,), (Constraint.build(2, Relation.LE, x1),), x1)
    assert maximize(infeasible).kind is LPStatus.INFEASIBLE


def test_degenerate_problem_terminates_in_every_order():
    problem = _beale()
    for order in permutations(range(len(problem.constraints))):
        result = maximize(problem.permuted(order))
        assert result.kind is LPStatus.OPTIMAL
        assert result.value == Fraction(5, 4)


def test_permuted_chamber_systems_agree(rng, chambers):
    # Chamber systems of n = 6, the kind recorded when a solve is slow
    for cfg in chambers[6][::5]:
        _assert_permutations_agree(rng, region_problem(cfg))


def _assert_permutations_agree(rng, problem: LPProblem):
    reference = check_feasible_strict(problem)
    _assert_feasible(reference)
    for _ in range(10):
        order = list(range(len(problem.constraints)))
        rng.shuffle(order)
        result = check_feasible_strict(problem.permuted(order))
        assert result.kind is reference.kind
        assert result.slack == reference.slack
        if result.kind is LPStatus.FEASIBLE:
            _assert_witness_sound(problem, result.witness)


def test_identical_problems_give_identical_witnesses():
    problem = LPProblem((1, 2, 3), _chain(0, x1, x3, x2, 1))
    assert check_feasible_strict(problem).witness == check_feasible_strict(problem).witness


def test_problem_validation():
    with pytest.raises(ValueError):
        LPProblem((1,), (Constraint.build(x2, Relation.LE, 1),))
    with pytest.raises(ValueError):
        LPProblem((1,), (), x2)
    with pytest.raises(ValueError):
        check_feasible_strict(LPProblem((1,), (), x1))
    with pytest.raises(ValueError):
        maximize(LPProblem((1,), ()))


def test_to_text_lists_every_constraint():
    problem = LPProblem((1, 2), _chain(0, x1, x2, 1), box={2: (Fraction(0), None)})
    text = problem.to_text()
    assert text.splitlines()[0] == "variables x1 x2"
    assert "box x2 0 inf" in text
    assert text.count("< 0") == 3
