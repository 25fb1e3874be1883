"""
Exact rational arithmetic, sparse linear expressions, quadratic forms and
exact linear-system solving.

Every number on the proof path is a ``fractions.Fraction``; nothing here ever
rounds.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

Rational = Fraction
Point = Mapping[int, Fraction]
Number = Union[int, Fraction]

_RATIONAL_PATTERN = re.compile(r"^-?\d+(/\d+)?$")
_DECIMAL_PATTERN = re.compile(r"^-?\d+\.\d+$")


class DimensionError(ValueError):
    """Raised when matrix and vector shapes do not agree."""


def rational_arith(a: Fraction, b: Fraction, op: str) -> Fraction:
    """
    Apply one of the four field operations exactly.

    Args:
        a: Left operand
        b: Right operand
        op: One of "+", "-", "*", "/" (also accepts "×" and "÷")

    Returns:
        The canonical exact result

    Raises:
        ZeroDivisionError: Division by zero
        ValueError: Unknown operator
    """
    a, b = Fraction(a), Fraction(b)
    if op == "+":
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        if b == 0:
            raise ZeroDivisionError(f"division of {format_rational(a)} by zero")
        return a / b
    raise ValueError(f"Unknown rational operator: {op!r}")


def parse_rational(text: str) -> Fraction:
    """
    Parse ``p/q``, an integer, or a terminating decimal without rounding.

    Args:
        text: The text to parse

    Returns:
        The exact value in canonical form

    Raises:
        ValueError: Malformed text
        ZeroDivisionError: Zero denominator
    """
    text = text.strip()
    if _RATIONAL_PATTERN.match(text):
        numerator, _, denominator = text.partition("/")
        if denominator and int(denominator) == 0:
            raise ZeroDivisionError(f"zero denominator in {text!r}")
        return Fraction(int(numerator), int(denominator or 1))
    if _DECIMAL_PATTERN.match(text):
        sign = -1 if text.startswith("-") else 1
        whole, _, digits = text.lstrip("-").partition(".")
        return sign * Fraction(int(whole + digits), 10 ** len(digits))
    raise ValueError(f"Malformed rational: {text!r}")


def format_rational(value: Fraction) -> str:
    """Render a rational as ``p/q`` (or ``p`` when integral)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class LinearExpr:
    """
    Sparse affine expression ``sum(coeff[v] * x_v) + constant``.

    Zero coefficients are never stored, so two equal expressions compare equal.
    """

    coefficients: Mapping[int, Fraction] = field(default_factory=dict)
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        cleaned = {v: Fraction(c) for v, c in self.coefficients.items() if c != 0}
        object.__setattr__(self, "coefficients", cleaned)
        object.__setattr__(self, "constant", Fraction(self.constant))

    @classmethod
    def variable(cls, index: int, coefficient: Number = 1) -> "LinearExpr":
        return cls({index: Fraction(coefficient)})

    @classmethod
    def const(cls, value: Number) -> "LinearExpr":
        return cls({}, Fraction(value))

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(sorted(self.coefficients))

    def coefficient(self, index: int) -> Fraction:
        return self.coefficients.get(index, Fraction(0))

    def is_constant(self) -> bool:
        return not self.coefficients

    def evaluate(self, point: Point) -> Fraction:
        try:
            total = self.constant
            for v, c in self.coefficients.items():
                total += c * point[v]
            return total
        except KeyError as e:
            raise ValueError(f"Missing variable x{e.args[0]} in point") from e

    def substitute(self, mapping: Mapping[int, "LinearExpr"]) -> "LinearExpr":
        result = LinearExpr.const(self.constant)
        for v, c in self.coefficients.items():
            result = result + (mapping[v] * c if v in mapping else LinearExpr.variable(v, c))
        return result

    def __add__(self, other):
        if isinstance(other, QuadraticForm):
            return other + self
        other = _as_linear(other)
        if other is NotImplemented:
            return NotImplemented
        merged = dict(self.coefficients)
        for v, c in other.coefficients.items():
            merged[v] = merged.get(v, Fraction(0)) + c
        return LinearExpr(merged, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self):
        return LinearExpr({v: -c for v, c in self.coefficients.items()}, -self.constant)

    def __sub__(self, other):
        if isinstance(other, QuadraticForm):
            return -other + self
        other = _as_linear(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LinearExpr):
            return QuadraticForm.product(self, other)
        if isinstance(other, (int, Fraction)):
            factor = Fraction(other)
            return LinearExpr(
                {v: c * factor for v, c in self.coefficients.items()},
                self.constant * factor,
            )
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __str__(self) -> str:
        terms = [f"{format_rational(c)}*x{v}" for v, c in sorted(self.coefficients.items())]
        if self.constant != 0 or not terms:
            terms.append(format_rational(self.constant))
        return " + ".join(terms)


def _as_linear(value) -> Union[LinearExpr, type(NotImplemented)]:
    if isinstance(value, LinearExpr):
        return value
    if isinstance(value, (int, Fraction)):
        return LinearExpr.const(value)
    return NotImplemented


@dataclass(frozen=True)
class QuadraticForm:
    """
    Exact quadratic ``x^T Q x + L x + c``.

    ``quad`` is a sparse symmetric matrix: every off-diagonal write lands on both
    ``(u, v)`` and ``(v, u)``, which keeps the gradient at ``2 Q x + L``.
    """

    quad: Mapping[Tuple[int, int], Fraction] = field(default_factory=dict)
    linear: Mapping[int, Fraction] = field(default_factory=dict)
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        quad: Dict[Tuple[int, int], Fraction] = {}
        for (u, v), c in self.quad.items():
            if c == 0:
                continue
            quad[(u, v)] = Fraction(c)
        for (u, v), c in quad.items():
            if quad.get((v, u)) != c:
                raise ValueError(f"Quadratic part is not symmetric at ({u}, {v})")
        object.__setattr__(self, "quad", quad)
        object.__setattr__(
            self, "linear", {v: Fraction(c) for v, c in self.linear.items() if c != 0}
        )
        object.__setattr__(self, "constant", Fraction(self.constant))

    @classmethod
    def zero(cls) -> "QuadraticForm":
        return cls()

    @classmethod
    def coerce(cls, value) -> "QuadraticForm":
        """Lift a number, LinearExpr or QuadraticForm to a QuadraticForm."""
        if isinstance(value, QuadraticForm):
            return value
        if isinstance(value, LinearExpr):
            return cls({}, value.coefficients, value.constant)
        if isinstance(value, (int, Fraction)):
            return cls({}, {}, Fraction(value))
        raise TypeError(f"Cannot lift {type(value).__name__} to a quadratic form")

    @classmethod
    def product(cls, left: LinearExpr, right: LinearExpr) -> "QuadraticForm":
        builder = _FormBuilder()
        builder.add_product(left, right)
        return builder.build()

    @classmethod
    def sum(cls, forms: Iterable) -> "QuadraticForm":
        builder = _FormBuilder()
        for form in forms:
            builder.add(cls.coerce(form))
        return builder.build()

    @property
    def variables(self) -> Tuple[int, ...]:
        names = set(self.linear)
        for u, v in self.quad:
            names.update((u, v))
        return tuple(sorted(names))

    def evaluate(self, point: Point) -> Fraction:
        try:
            total = self.constant
            for (u, v), c in self.quad.items():
                total += c * point[u] * point[v]
            for v, c in self.linear.items():
                total += c * point[v]
            return total
        except KeyError as e:
            raise ValueError(f"Missing variable x{e.args[0]} in point") from e

    def gradient_expr(self, index: int) -> LinearExpr:
        """The partial derivative in ``x_index`` as an affine expression."""
        coefficients: Dict[int, Fraction] = {}
        for (u, v), c in self.quad.items():
            if u == index:
                coefficients[v] = coefficients.get(v, Fraction(0)) + 2 * c
        return LinearExpr(coefficients, self.linear.get(index, Fraction(0)))

    def substitute(self, mapping: Mapping[int, LinearExpr]) -> "QuadraticForm":
        """Replace variables by affine expressions; unmapped variables stay."""

        def image(v: int) -> LinearExpr:
            return mapping[v] if v in mapping else LinearExpr.variable(v)

        builder = _FormBuilder()
        builder.constant += self.constant
        for (u, v), c in self.quad.items():
            builder.add_product(image(u), image(v), c)
        for v, c in self.linear.items():
            builder.add_linear(image(v), c)
        return builder.build()

    def __add__(self, other):
        if isinstance(other, (QuadraticForm, LinearExpr, int, Fraction)):
            return QuadraticForm.sum((self, other))
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        if isinstance(other, (QuadraticForm, LinearExpr, int, Fraction)):
            return self + (-QuadraticForm.coerce(other))
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            factor = Fraction(other)
            return QuadraticForm(
                {k: c * factor for k, c in self.quad.items()},
                {v: c * factor for v, c in self.linear.items()},
                self.constant * factor,
            )
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented


class _FormBuilder:
    """Mutable accumulator used while a form is being assembled."""

    def __init__(self):
        self.quad: Dict[Tuple[int, int], Fraction] = {}
        self.linear: Dict[int, Fraction] = {}
        self.constant = Fraction(0)

    def _bump_quad(self, u: int, v: int, c: Fraction) -> None:
        if u == v:
            self.quad[(u, u)] = self.quad.get((u, u), Fraction(0)) + c
            return
        half = c / 2
        self.quad[(u, v)] = self.quad.get((u, v), Fraction(0)) + half
        self.quad[(v, u)] = self.quad.get((v, u), Fraction(0)) + half

    def add(self, form: QuadraticForm) -> None:
        for key, c in form.quad.items():
            self.quad[key] = self.quad.get(key, Fraction(0)) + c
        for v, c in form.linear.items():
            self.linear[v] = self.linear.get(v, Fraction(0)) + c
        self.constant += form.constant

    def add_linear(self, expr: LinearExpr, scale: Fraction = Fraction(1)) -> None:
        for v, c in expr.coefficients.items():
            self.linear[v] = self.linear.get(v, Fraction(0)) + scale * c
        self.constant += scale * expr.constant

    def add_product(
        self, left: LinearExpr, right: LinearExpr, scale: Fraction = Fraction(1)
    ) -> None:
        for u, a in left.coefficients.items():
            for v, b in right.coefficients.items():
                self._bump_quad(u, v, scale * a * b)
        self.add_linear(left, scale * right.constant)
        for v, b in right.coefficients.items():
            self.linear[v] = self.linear.get(v, Fraction(0)) + scale * left.constant * b

    def build(self) -> QuadraticForm:
        return QuadraticForm(self.quad, self.linear, self.constant)


def qf_eval(q: QuadraticForm, x: Point) -> Fraction:
    """Exact value of ``q`` at ``x``."""
    return q.evaluate(x)


def qf_gradient(
    q: QuadraticForm, x: Point, variables: Optional[Sequence[int]] = None
) -> Tuple[Fraction, ...]:
    """
    Exact gradient ``2 Q x + L`` of ``q`` at ``x``.

    Args:
        q: The quadratic form
        x: Point covering every variable of ``q``
        variables: Order of the returned components (defaults to sorted keys of ``x``)

    Returns:
        Gradient components in ``variables`` order
    """
    missing = [v for v in q.variables if v not in x]
    if missing:
        raise ValueError(f"Missing variable x{missing[0]} in point")
    order = list(variables) if variables is not None else sorted(x)
    return tuple(q.gradient_expr(v).evaluate(x) for v in order)


class SolveKind(str, Enum):
    UNIQUE = "Unique"
    AFFINE = "Affine"
    INCONSISTENT = "Inconsistent"


@dataclass(frozen=True)
class LinearSolveResult:
    kind: SolveKind
    particular: Optional[Tuple[Fraction, ...]] = None
    nullspace_basis: Tuple[Tuple[Fraction, ...], ...] = ()


def solve_linear(
    A: Sequence[Sequence[Number]],
    b: Sequence[Number],
    n_cols: Optional[int] = None,
) -> LinearSolveResult:
    """
    Solve ``A x = b`` exactly by Gauss-Jordan elimination.

    Pivots are chosen by the first nonzero entry; magnitude plays no role since
    nothing is rounded.

    Args:
        A: Coefficient rows
        b: Right-hand side, one entry per row
        n_cols: Column count, required when ``A`` has no rows

    Returns:
        Unique/Affine results carry a particular solution; Affine results also a
        nullspace basis

    Raises:
        DimensionError: Ragged ``A`` or ``len(b) != len(A)``
    """
    if len(A) != len(b):
        raise DimensionError(f"A has {len(A)} rows but b has {len(b)} entries")
    width = n_cols if n_cols is not None else (len(A[0]) if A else 0)
    if any(len(row) != width for row in A):
        raise DimensionError(f"Every row of A must have {width} columns")

    rows: List[List[Fraction]] = [
        [Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(A, b)
    ]
    pivot_cols: List[int] = []
    r = 0
    for col in range(width):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][col]
        rows[r] = [v / lead for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [v - factor * p for v, p in zip(rows[i], rows[r])]
        pivot_cols.append(col)
        r += 1
        if r == len(rows):
            break

    # A zero row with a nonzero right-hand side is a contradiction
    for row in rows[r:]:
        if row[width] != 0:
            return LinearSolveResult(SolveKind.INCONSISTENT)

    particular = [Fraction(0)] * width
    for i, col in enumerate(pivot_cols):
        particular[col] = rows[i][width]

    free_cols = [c for c in range(width) if c not in pivot_cols]
    basis = []
    for free in free_cols:
        vector = [Fraction(0)] * width
        vector[free] = Fraction(1)
        for i, col in enumerate(pivot_cols):
            vector[col] = -rows[i][free]
        # First nonzero entry is positive
        if next(v for v in vector if v != 0) < 0:
            vector = [-v for v in vector]
        basis.append(tuple(vector))

    kind = SolveKind.AFFINE if basis else SolveKind.UNIQUE
    return LinearSolveResult(kind, tuple(particular), tuple(basis))
