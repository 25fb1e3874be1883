from fractions import Fraction

import pytest

from core.exact import (
    DimensionError,
    LinearExpr,
    QuadraticForm,
    SolveKind,
    format_rational,
    parse_rational,
    qf_eval,
    qf_gradient,
    rational_arith,
    solve_linear,
)


def _random_rational(rng, span: int = 50) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, span))


def _random_form(rng, variables=(1, 2, 3)) -> QuadraticForm:
    terms = []
    for _ in range(4):
        left = LinearExpr({v: _random_rational(rng) for v in variables}, _random_rational(rng))
        right = LinearExpr({rng.choice(variables): _random_rational(rng)}, _random_rational(rng))
        terms.append(left * right)
    terms.append(LinearExpr.variable(rng.choice(variables), _random_rational(rng)))
    return QuadraticForm.sum(terms)


@pytest.mark.parametrize(
    "a, b, op, expected",
    [
        (Fraction(1, 3), Fraction(1, 6), "+", Fraction(1, 2)),
        (Fraction(117, 548), Fraction(548), "×", Fraction(117)),
        (Fraction(28, 548), Fraction(1), "*", Fraction(7, 137)),
        (Fraction(1, 2), Fraction(1, 3), "-", Fraction(1, 6)),
        (Fraction(1, 2), Fraction(1, 4), "÷", Fraction(2)),
    ],
)
def test_rational_arith(a, b, op, expected):
    assert rational_arith(a, b, op) == expected


def test_rational_arith_errors():
    with pytest.raises(ZeroDivisionError):
        rational_arith(Fraction(1), Fraction(0), "/")
    with pytest.raises(ValueError):
        rational_arith(Fraction(1), Fraction(1), "^")


def test_field_axioms_hold_exactly(rng):
    for _ in range(200):
        a, b, c = (_random_rational(rng) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        if b != 0:
            assert rational_arith(rational_arith(a, b, "/"), b, "*") == a


@pytest.mark.parametrize(
    "text, expected",
    [("28/548", Fraction(7, 137)), ("0.5", Fraction(1, 2)), ("-3", Fraction(-3)), (" 1/3 ", Fraction(1, 3)), ("-0.125", Fraction(-1, 8))],
)
def test_parse_rational(text, expected):
    assert parse_rational(text) == expected


@pytest.mark.parametrize("text", ["", "1/", "a/b", "1.2.3", "1e5", "--1"])
def test_parse_rational_rejects_malformed(text):
    with pytest.raises(ValueError):
        parse_rational(text)


def test_parse_rational_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        parse_rational("3/0")


def test_format_rational():
    assert format_rational(Fraction(28, 548)) == "7/137"
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(Fraction(-1, 3)) == "-1/3"


def test_linear_expr_drops_zero_coefficients():
    expr = LinearExpr.variable(1) + LinearExpr.variable(2) - LinearExpr.variable(1)
    assert expr == LinearExpr.variable(2)
    assert expr.variables == (2,)
    assert (2 * expr + 1).evaluate({2: Fraction(1, 4)}) == Fraction(3, 2)


def test_linear_expr_substitute():
    expr = LinearExpr({1: 2, 2: 1}, 3)
    image = expr.substitute({1: 1 - LinearExpr.variable(2)})
    assert image == LinearExpr({2: -1}, 5)


def test_linear_expr_missing_variable():
    with pytest.raises(ValueError):
        LinearExpr.variable(3).evaluate({1: Fraction(0)})


def test_qf_single_square():
    x1 = LinearExpr.variable(1)
    q = x1 * x1
    point = {1: Fraction(1, 2)}
    assert qf_eval(q, point) == Fraction(1, 4)
    assert qf_gradient(q, point) == (Fraction(1),)


def test_qf_affine_case():
    q = QuadraticForm({}, {1: 2, 2: 3}, 5)
    point = {1: Fraction(1), 2: Fraction(1)}
    assert qf_eval(q, point) == 10
    assert qf_gradient(q, point) == (Fraction(2), Fraction(3))


def test_qf_missing_variable():
    q = LinearExpr.variable(1) * LinearExpr.variable(2)
    with pytest.raises(ValueError):
        qf_eval(q, {1: Fraction(1)})
    with pytest.raises(ValueError):
        qf_gradient(q, {1: Fraction(1)})


def test_quadratic_form_is_symmetric():
    q = LinearExpr.variable(1) * LinearExpr.variable(2)
    assert q.quad[(1, 2)] == q.quad[(2, 1)] == Fraction(1, 2)
    with pytest.raises(ValueError):
        QuadraticForm({(1, 2): Fraction(1)})


def test_gradient_matches_central_difference(rng):
    # Central differences are exact on quadratics
    step = Fraction(1, 1000)
    for _ in range(50):
        q = _random_form(rng)
        point = {v: _random_rational(rng) for v in (1, 2, 3)}
        gradient = qf_gradient(q, point, (1, 2, 3))
        for v, component in zip((1, 2, 3), gradient):
            ahead = {**point, v: point[v] + step}
            behind = {**point, v: point[v] - step}
            assert (qf_eval(q, ahead) - qf_eval(q, behind)) / (2 * step) == component


def test_substitute_commutes_with_evaluation(rng):
    q = _random_form(rng)
    mapping = {3: 1 - LinearExpr.variable(1)}
    point = {1: Fraction(2, 7), 2: Fraction(-3, 5)}
    assert q.substitute(mapping).evaluate(point) == q.evaluate({**point, 3: 1 - point[1]})


def test_solve_linear_unique():
    result = solve_linear([[1, 0], [0, 1]], [Fraction(1, 2), Fraction(1, 3)])
    assert result.kind is SolveKind.UNIQUE
    assert result.particular == (Fraction(1, 2), Fraction(1, 3))


def test_solve_linear_affine():
    result = solve_linear([[1, 1]], [1])
    assert result.kind is SolveKind.AFFINE
    assert result.particular == (Fraction(1), Fraction(0))
    assert result.nullspace_basis == ((Fraction(1), Fraction(-1)),)


def test_solve_linear_inconsistent():
    assert solve_linear([[1, 1], [1, 1]], [1, 2]).kind is SolveKind.INCONSISTENT


def test_solve_linear_dimension_mismatch():
    with pytest.raises(DimensionError):
        solve_linear([[1, 0]], [1, 2])
    with pytest.raises(DimensionError):
        solve_linear([[1, 0], [1]], [1, 2])


def test_solve_linear_residual_is_zero(rng):
    for _ in range(50):
        rows, cols = rng.randint(1, 5), rng.randint(1, 5)
        A = [[Fraction(rng.randint(-3, 3)) for _ in range(cols)] for _ in range(rows)]
        x = [_random_rational(rng) for _ in range(cols)]
        b = [sum(a * v for a, v in zip(row, x)) for row in A]
        result = solve_linear(A, b)
        assert result.kind is not SolveKind.INCONSISTENT
        for row, rhs in zip(A, b):
            assert sum(a * v for a, v in zip(row, result.particular)) == rhs
            for direction in result.nullspace_basis:
                assert sum(a * v for a, v in zip(row, direction)) == 0
