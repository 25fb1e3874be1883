"""
Exact-rational linear programming.

A two-phase primal simplex on a dictionary (each basic variable written as
``b_i - sum(A_ij * nonbasic_j)``) with Bland's rule for both the entering and
the leaving variable, so every solve terminates regardless of the order in
which constraints are supplied. Strict inequalities share one slack variable
``eps`` whose exact maximum decides strict feasibility; there is no numeric
threshold anywhere.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from core.exact import LinearExpr, Point, format_rational


logger = logging.getLogger(__name__)

DEFAULT_BOX = (Fraction(0), Fraction(1))
EPSILON_CAP = Fraction(1)

# Label of the phase-one auxiliary variable; smaller than every real label
_AUX = -1


class LPError(RuntimeError):
    """Raised when the solver returns something that fails exact re-verification."""


class Relation(str, Enum):
    LT = "<"
    LE = "<="
    EQ = "="


@dataclass(frozen=True)
class Constraint:
    """``lhs REL 0``; any right-hand side is folded into ``lhs``."""

    lhs: LinearExpr
    relation: Relation

    @classmethod
    def build(cls, left, relation: Relation, right=0) -> "Constraint":
        return cls(LinearExpr.const(0) + left - right, Relation(relation))

    @property
    def is_strict(self) -> bool:
        return self.relation is Relation.LT

    def closed(self) -> "Constraint":
        if self.relation is Relation.LT:
            return Constraint(self.lhs, Relation.LE)
        return self

    def is_satisfied(self, point: Point) -> bool:
        value = self.lhs.evaluate(point)
        if self.relation is Relation.LT:
            return value < 0
        if self.relation is Relation.LE:
            return value <= 0
        return value == 0

    def __str__(self) -> str:
        return f"{self.lhs} {self.relation.value} 0"


class LPStatus(str, Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LPProblem:
    """
    Variables, constraints, an optional objective and per-variable box bounds.

    Box bounds default to [0, 1]; an upper bound of ``None`` means unbounded above.
    """

    variables: Tuple[int, ...]
    constraints: Tuple[Constraint, ...] = ()
    objective: Optional[LinearExpr] = None
    box: Mapping[int, Tuple[Fraction, Optional[Fraction]]] = field(default_factory=dict)

    def __post_init__(self):
        variables = tuple(sorted(set(self.variables)))
        declared = set(variables)
        for constraint in self.constraints:
            stray = set(constraint.lhs.variables) - declared
            if stray:
                raise ValueError(
                    f"Constraint '{constraint}' uses undeclared variable x{min(stray)}"
                )
        if self.objective is not None:
            stray = set(self.objective.variables) - declared
            if stray:
                raise ValueError(f"Objective uses undeclared variable x{min(stray)}")
        box = {}
        for v in variables:
            lo, hi = self.box.get(v, DEFAULT_BOX)
            if lo is None:
                raise ValueError(f"Variable x{v} needs a finite lower bound")
            box[v] = (Fraction(lo), None if hi is None else Fraction(hi))
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "box", box)

    def with_constraints(self, extra: Sequence[Constraint]) -> "LPProblem":
        return LPProblem(self.variables, self.constraints + tuple(extra), self.objective, self.box)

    def permuted(self, order: Sequence[int]) -> "LPProblem":
        return LPProblem(
            self.variables,
            tuple(self.constraints[i] for i in order),
            self.objective,
            self.box,
        )

    def in_box(self, point: Point) -> bool:
        for v, (lo, hi) in self.box.items():
            if point[v] < lo or (hi is not None and point[v] > hi):
                return False
        return True

    def to_text(self) -> str:
        """Verbatim, line-oriented rendering used when a system is recorded."""
        lines = [f"variables {' '.join(f'x{v}' for v in self.variables)}"]
        for v, (lo, hi) in self.box.items():
            upper = "inf" if hi is None else format_rational(hi)
            lines.append(f"box x{v} {format_rational(lo)} {upper}")
        if self.objective is not None:
            lines.append(f"maximize {self.objective}")
        lines.extend(str(c) for c in self.constraints)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LPResult:
    kind: LPStatus
    witness: Optional[Dict[int, Fraction]] = None
    value: Optional[Fraction] = None
    slack: Optional[Fraction] = None


class _Dictionary:
    """
    Simplex dictionary over labelled variables.

    Row ``i`` reads ``basic[i] = b[i] - sum(A[i][j] * nonbasic[j])`` and the
    objective reads ``z + sum(c[j] * nonbasic[j])``.
    """

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], n_cols: int):
        self.A = rows
        self.b = rhs
        self.nonbasic = list(range(n_cols))
        self.basic = list(range(n_cols, n_cols + len(rows)))
        self.c = [Fraction(0)] * n_cols
        self.z = Fraction(0)
        self.pivots = 0

    def pivot(self, i: int, j: int) -> None:
        row = self.A[i]
        piv = row[j]
        inv = 1 / piv
        # modify row i
        new_row = [v * inv for v in row]
        new_row[j] = inv
        self.b[i] = self.b[i] * inv
        self.A[i] = new_row
        # modify other rows
        for k in range(len(self.A)):
            if k == i:
                continue
            f = self.A[k][j]
            if f == 0:
                continue
            other = self.A[k]
            for col in range(len(other)):
                if col != j and new_row[col] != 0:
                    other[col] -= f * new_row[col]
            other[j] = -f * inv
            self.b[k] -= f * self.b[i]
        # modify c
        delta = self.c[j]
        if delta != 0:
            for col in range(len(self.c)):
                if col != j and new_row[col] != 0:
                    self.c[col] -= delta * new_row[col]
            self.c[j] = -delta * inv
            self.z += delta * self.b[i]
        self.nonbasic[j], self.basic[i] = self.basic[i], self.nonbasic[j]
        self.pivots += 1

    def bland_step(self) -> str:
        candidates = [j for j in range(len(self.c)) if self.c[j] > 0]
        if not candidates:
            return "optimal"
        j = min(candidates, key=lambda col: self.nonbasic[col])
        best = None
        for i in range(len(self.A)):
            a = self.A[i][j]
            if a > 0:
                key = (self.b[i] / a, self.basic[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return "unbounded"
        self.pivot(best[1], j)
        return "continue"

    def run(self) -> str:
        while True:
            status = self.bland_step()
            if status != "continue":
                return status

    def install_objective(self, cost: Mapping[int, Fraction], constant: Fraction) -> None:
        self.c = [Fraction(0)] * len(self.nonbasic)
        self.z = Fraction(constant)
        for label, cv in cost.items():
            if cv == 0:
                continue
            if label in self.nonbasic:
                self.c[self.nonbasic.index(label)] += cv
            else:
                i = self.basic.index(label)
                self.z += cv * self.b[i]
                for col, a in enumerate(self.A[i]):
                    if a != 0:
                        self.c[col] -= cv * a

    def phase_one(self) -> bool:
        """Drive the dictionary to a feasible basis; False when none exists."""
        if all(v >= 0 for v in self.b):
            return True
        for row in self.A:
            row.append(Fraction(-1))
        self.nonbasic.append(_AUX)
        aux_col = len(self.nonbasic) - 1
        self.c = [Fraction(0)] * len(self.nonbasic)
        self.c[aux_col] = Fraction(-1)
        self.z = Fraction(0)

        leaving = min(range(len(self.A)), key=lambda r: (self.b[r], self.basic[r]))
        self.pivot(leaving, aux_col)
        self.run()
        if self.z < 0:
            return False

        if _AUX in self.basic:
            i = self.basic.index(_AUX)
            cols = [j for j, a in enumerate(self.A[i]) if a != 0 and self.nonbasic[j] != _AUX]
            if cols:
                self.pivot(i, min(cols, key=lambda col: self.nonbasic[col]))
            else:
                # Redundant row: the auxiliary variable is its only entry
                del self.A[i]
                del self.b[i]
                del self.basic[i]
        aux_col = self.nonbasic.index(_AUX)
        for row in self.A:
            del row[aux_col]
        del self.nonbasic[aux_col]
        del self.c[aux_col]
        return True

    def values(self) -> Dict[int, Fraction]:
        result = {label: Fraction(0) for label in self.nonbasic}
        for label, value in zip(self.basic, self.b):
            result[label] = value
        return result


@dataclass
class _StandardForm:
    """``max cost.y s.t. rows.y <= rhs, y >= 0`` with ``y = x - lower``."""

    variables: List[int]
    lower: List[Fraction]
    rows: List[List[Fraction]]
    rhs: List[Fraction]
    has_epsilon: bool
    trivially_infeasible: bool = False


def _standard_form(problem: LPProblem, strict: bool) -> _StandardForm:
    variables = list(problem.variables)
    index = {v: i for i, v in enumerate(variables)}
    lower = [problem.box[v][0] for v in variables]
    has_epsilon = strict
    width = len(variables) + (1 if has_epsilon else 0)

    raw: List[Tuple[List[Fraction], Fraction]] = []

    def add_row(lhs: LinearExpr, sign: int, epsilon: bool) -> None:
        coefs = [Fraction(0)] * width
        shift = lhs.constant
        for v, a in lhs.coefficients.items():
            coefs[index[v]] = sign * a
            shift += a * lower[index[v]]
        if epsilon:
            coefs[-1] = Fraction(1)
        raw.append((coefs, -sign * shift))

    for constraint in problem.constraints:
        if constraint.relation is Relation.EQ:
            add_row(constraint.lhs, 1, False)
            add_row(constraint.lhs, -1, False)
        else:
            add_row(constraint.lhs, 1, strict and constraint.is_strict)

    for v in variables:
        lo, hi = problem.box[v]
        if hi is not None:
            coefs = [Fraction(0)] * width
            coefs[index[v]] = Fraction(1)
            raw.append((coefs, hi - lo))
    if has_epsilon:
        coefs = [Fraction(0)] * width
        coefs[-1] = Fraction(1)
        raw.append((coefs, EPSILON_CAP))

    # Scale rows so the first nonzero coefficient has magnitude one, then drop duplicates
    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    seen = set()
    infeasible = False
    for coefs, bound in raw:
        lead = next((a for a in coefs if a != 0), None)
        if lead is None:
            if bound < 0:
                infeasible = True
            continue
        scale = 1 / abs(lead)
        coefs = [a * scale for a in coefs]
        bound = bound * scale
        key = (tuple(coefs), bound)
        if key in seen:
            continue
        seen.add(key)
        rows.append(coefs)
        rhs.append(bound)

    return _StandardForm(variables, lower, rows, rhs, has_epsilon, infeasible)


def _solve(
    problem: LPProblem, objective: LinearExpr, strict: bool
) -> Tuple[LPStatus, Optional[Dict[int, Fraction]], Optional[Fraction]]:
    form = _standard_form(problem, strict)
    if form.trivially_infeasible:
        return LPStatus.INFEASIBLE, None, None

    width = len(form.variables) + (1 if form.has_epsilon else 0)
    dictionary = _Dictionary([list(r) for r in form.rows], list(form.rhs), width)
    if not dictionary.phase_one():
        return LPStatus.INFEASIBLE, None, None

    index = {v: i for i, v in enumerate(form.variables)}
    cost: Dict[int, Fraction] = {}
    constant = objective.constant
    for v, a in objective.coefficients.items():
        cost[index[v]] = a
        constant += a * form.lower[index[v]]
    if form.has_epsilon:
        cost[width - 1] = Fraction(1)
    dictionary.install_objective(cost, constant)

    if dictionary.run() == "unbounded":
        return LPStatus.UNBOUNDED, None, None

    values = dictionary.values()
    witness = {v: values[index[v]] + form.lower[index[v]] for v in form.variables}
    if form.has_epsilon:
        witness[_AUX] = values[width - 1]
    logger.debug(f"Simplex finished after {dictionary.pivots} pivots")
    return LPStatus.OPTIMAL, witness, dictionary.z


def _verify(problem: LPProblem, witness: Point, strict: bool) -> None:
    if not problem.in_box(witness):
        raise LPError("Solver witness leaves the variable box")
    for constraint in problem.constraints:
        check = constraint if strict else constraint.closed()
        if not check.is_satisfied(witness):
            raise LPError(f"Solver witness violates '{check}'")


def check_feasible_strict(problem: LPProblem) -> LPResult:
    """
    Decide feasibility of a system that may contain strict inequalities.

    Every strict constraint ``lhs < 0`` becomes ``lhs + eps <= 0`` for one shared
    ``eps`` in [0, 1], and ``eps`` is maximised. The system is feasible exactly
    when the exact maximum is positive.

    Args:
        problem: Feasibility query (no objective)

    Returns:
        Feasible with a witness and the achieved slack, or Infeasible
    """
    if problem.objective is not None:
        raise ValueError("check_feasible_strict takes a feasibility query without objective")
    status, witness, value = _solve(problem, LinearExpr.const(0), strict=True)
    if status is LPStatus.UNBOUNDED:
        raise LPError("Slack variable unbounded; the constraint system is malformed")
    if status is LPStatus.INFEASIBLE:
        return LPResult(LPStatus.INFEASIBLE)
    epsilon = witness.pop(_AUX)
    if epsilon <= 0:
        return LPResult(LPStatus.INFEASIBLE, slack=epsilon)
    _verify(problem, witness, strict=True)
    return LPResult(LPStatus.FEASIBLE, witness=witness, slack=epsilon)


def maximize(problem: LPProblem) -> LPResult:
    """
    Maximise the problem's objective over the closure of its constraints.

    Args:
        problem: Problem with an objective; strict constraints are relaxed to ``<=``

    Returns:
        Optimal with value and a vertex witness, Infeasible, or Unbounded
    """
    if problem.objective is None:
        raise ValueError("maximize requires an objective")
    status, witness, value = _solve(problem, problem.objective, strict=False)
    if status is not LPStatus.OPTIMAL:
        return LPResult(status)
    _verify(problem, witness, strict=False)
    if problem.objective.evaluate(witness) != value:
        raise LPError("Objective value disagrees with the witness")
    return LPResult(LPStatus.OPTIMAL, witness=witness, value=value)
