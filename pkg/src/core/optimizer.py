"""
Exact global minimisation of the monochromatic measure over antisymmetric block
colourings with at most ``n_max`` blocks.

On every chamber the measure is one quadratic piece. Its minimum over the closed
chamber is attained either at a critical point of the piece inside the closure or on
the boundary, and the boundary consists of colourings with fewer blocks, which are
handled by the smaller even ``n``. So the sweep only needs critical points.
"""

import hashlib
import logging
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from core.diagram import (
    Configuration,
    Endpoints,
    derive_configuration,
    mono_fraction_form,
)
from core.discrete import random_baseline
from core.enumerator import (
    cache_path,
    enumerate_configurations,
    free_variables,
    read_cache,
    region_constraints,
    write_cache,
)
from core.exact import (
    LinearExpr,
    QuadraticForm,
    SolveKind,
    format_rational,
    qf_gradient,
    solve_linear,
)
from core.lp import Constraint, LPProblem, LPStatus, Relation, maximize
from utils.parallel import apply_pool


logger = logging.getLogger(__name__)

CERTIFIED_N_MAX = 12


class MissingCacheError(OSError):
    """A configuration cache is required but absent."""


@dataclass(frozen=True)
class CriticalCandidate:
    point: Dict[int, Fraction]
    value: Fraction
    affine_dimension: int = 0


@dataclass(frozen=True)
class CriticalPointRecord:
    n: int
    config_id: str
    config_line: int
    point: Tuple[Fraction, ...]
    endpoints: Endpoints
    value: Fraction

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "config_line": self.config_line,
            "config_id": self.config_id,
            "point": [format_rational(v) for v in self.point],
            "endpoints": [format_rational(v) for v in self.endpoints.x],
            "value": format_rational(self.value),
        }


@dataclass
class PerNMinimum:
    n: int
    configurations: int
    candidates: int
    minimizers: List[CriticalPointRecord] = field(default_factory=list)

    @property
    def value(self) -> Optional[Fraction]:
        return self.minimizers[0].value if self.minimizers else None


@dataclass
class MinimizationReport:
    n_max: int
    per_n: List[PerNMinimum]
    global_minimum: CriticalPointRecord
    minimizers: List[CriticalPointRecord]
    unique: bool
    certified: bool
    elapsed_seconds: float = 0.0
    uniqueness_procedure: str = (
        "all minimum-attaining records collected; unique when they share one merged block structure"
    )

    def to_json(self) -> dict:
        baseline = random_baseline()
        return {
            "n_max": self.n_max,
            "certified": self.certified,
            "global": self.global_minimum.to_json(),
            "unique": self.unique,
            "uniqueness_procedure": self.uniqueness_procedure,
            "minimizers": [r.to_json() for r in self.minimizers],
            "per_n": [
                {
                    "n": entry.n,
                    "configurations": entry.configurations,
                    "critical_candidates": entry.candidates,
                    "value": format_rational(entry.value) if entry.value is not None else None,
                    "minimizers": [r.to_json() for r in entry.minimizers],
                }
                for entry in self.per_n
            ],
            "random_baseline": format_rational(baseline),
            "below_baseline": format_rational(baseline - self.global_minimum.value),
            "elapsed_seconds": round(self.elapsed_seconds, 3),
        }


def critical_points(
    form: QuadraticForm,
    region: Sequence[Constraint],
    variables: Optional[Sequence[int]] = None,
) -> Optional[CriticalCandidate]:
    """
    A critical point of ``form`` inside the closure of ``region``, if any.

    Args:
        form: Quadratic piece over the free variables
        region: Chamber constraints; strict ones are relaxed to ``<=``
        variables: Variable order (defaults to every variable of form and region)

    Returns:
        A candidate with its exact value, or None when no critical point lies in the
        closed region
    """
    if variables is None:
        names = set(form.variables)
        for constraint in region:
            names.update(constraint.lhs.variables)
        variables = sorted(names)
    variables = list(variables)
    closed = [c.closed() for c in region]

    gradient = [form.gradient_expr(v) for v in variables]
    A = [[g.coefficient(u) for u in variables] for g in gradient]
    b = [-g.constant for g in gradient]
    solution = solve_linear(A, b, n_cols=len(variables))

    if solution.kind is SolveKind.INCONSISTENT:
        return None

    particular = dict(zip(variables, solution.particular))
    if solution.kind is SolveKind.UNIQUE:
        if all(c.is_satisfied(particular) for c in closed):
            return CriticalCandidate(particular, form.evaluate(particular))
        return None

    # Affine critical set: the piece is constant on it
    shifted = {v: particular[v] + d for v, d in zip(variables, solution.nullspace_basis[0])}
    level = form.evaluate(particular)
    if form.evaluate(shifted) != level:
        raise RuntimeError("Quadratic piece is not constant on its affine critical set")

    equalities = [Constraint(g, Relation.EQ) for g in gradient]
    box = {v: (Fraction(-1), Fraction(2)) for v in variables}
    problem = LPProblem(
        tuple(variables), tuple(closed + equalities), LinearExpr.const(0), box
    )
    result = maximize(problem)
    if result.kind is not LPStatus.OPTIMAL:
        return None
    if form.evaluate(result.witness) != level:
        raise RuntimeError("Critical witness value differs from the affine critical level")
    return CriticalCandidate(result.witness, level, len(solution.nullspace_basis))


def config_id(cfg: Configuration, line: int) -> str:
    digest = hashlib.sha256(cfg.serialize().encode("utf-8")).hexdigest()
    return f"{digest[:12]}:{line}"


def _configuration_record(n: int, line: int, serialized: str) -> Optional[CriticalPointRecord]:
    """Worker entry point: the critical point of one chamber's piece, if any."""
    cfg = Configuration.parse(n, serialized)
    form = mono_fraction_form(cfg)
    variables = free_variables(n)
    candidate = critical_points(form, region_constraints(cfg, strict=False), variables)
    if candidate is None:
        return None
    point = tuple(candidate.point[v] for v in variables)
    return CriticalPointRecord(
        n, config_id(cfg, line), line, point, Endpoints.from_free(n, point), candidate.value
    )


def merged_block_lengths(e: Endpoints) -> Tuple[Fraction, ...]:
    """
    Lengths of the colour runs of ``e`` once empty blocks are dropped.

    Two endpoint vectors with equal run lengths describe the same colouring up to
    swapping the colours.
    """
    runs: List[List] = []
    for index, (left, right) in enumerate(zip(e.x, e.x[1:])):
        if right == left:
            continue
        color = index % 2
        if runs and runs[-1][0] == color:
            runs[-1][1] += right - left
        else:
            runs.append([color, right - left])
    return tuple(length for _, length in runs)


def _load_configurations(
    n: int,
    config_cache_dir: Optional[str],
    offline: bool,
    parallel_workers: int,
    progress: bool,
) -> List[Configuration]:
    path = cache_path(config_cache_dir, n) if config_cache_dir else None
    if path and os.path.exists(path):
        cached_n, configurations = read_cache(path)
        if cached_n != n:
            raise ValueError(f"Cache {path} holds n={cached_n}, expected n={n}")
        logger.info(f"Loaded {len(configurations)} configurations for n={n} from {path}")
        return configurations
    if offline:
        raise MissingCacheError(f"No configuration cache for n={n} at {path}")
    result = enumerate_configurations(n, parallel_workers=parallel_workers, progress=progress)
    if path:
        write_cache(path, n, result.configurations)
    return result.configurations


def _minimizers(records: Sequence[CriticalPointRecord]) -> List[CriticalPointRecord]:
    if not records:
        return []
    best = min(r.value for r in records)
    seen = set()
    result = []
    for record in records:
        if record.value != best or record.endpoints.x in seen:
            continue
        seen.add(record.endpoints.x)
        result.append(record)
    return result


def global_minimize(
    n_max: int,
    config_cache_dir: Optional[str] = None,
    parallel_workers: int = 1,
    offline: bool = False,
    uncertified: bool = False,
    progress: bool = False,
) -> MinimizationReport:
    """
    Sweep every chamber for every even ``n <= n_max`` and keep the exact minimum.

    Args:
        n_max: Largest even block count
        config_cache_dir: Directory of ``configs_n{N}.txt`` caches (read, and written
            after a fresh enumeration)
        parallel_workers: Processes for enumeration and per-chamber solves
        offline: Fail instead of enumerating when a cache is missing
        uncertified: Allow ``n_max`` above 12
        progress: Show progress bars

    Returns:
        The report with per-n minimizers and the global minimum

    Raises:
        MissingCacheError: ``offline`` and a cache is absent
    """
    if n_max < 0 or n_max % 2:
        raise ValueError(f"n_max must be an even number >= 0, got {n_max}")
    if n_max > CERTIFIED_N_MAX:
        if not uncertified:
            raise ValueError(
                f"n_max={n_max} exceeds {CERTIFIED_N_MAX}; pass --uncertified to run anyway"
            )
        logger.warning(f"n_max={n_max} is beyond the certified range; results are uncertified")

    start = time.perf_counter()
    per_n: List[PerNMinimum] = []
    all_records: List[CriticalPointRecord] = []
    for n in range(0, n_max + 1, 2):
        configurations = _load_configurations(
            n, config_cache_dir, offline, parallel_workers, progress
        )
        records = apply_pool(
            _configuration_record,
            [(n, line, cfg.serialize()) for line, cfg in enumerate(configurations)],
            workers=parallel_workers,
            verbose=progress,
            desc=f"n={n} chambers",
        )
        records = [r for r in records if r is not None]
        entry = PerNMinimum(n, len(configurations), len(records), _minimizers(records))
        per_n.append(entry)
        all_records.extend(records)
        value = format_rational(entry.value) if entry.value is not None else "none"
        logger.info(
            f"n={n}: {len(configurations)} chambers, {len(records)} critical candidates, min {value}"
        )

    minimizers = _minimizers(all_records)
    if not minimizers:
        raise RuntimeError("No critical point found for any n")
    structures = {merged_block_lengths(r.endpoints) for r in minimizers}
    report = MinimizationReport(
        n_max=n_max,
        per_n=per_n,
        global_minimum=minimizers[0],
        minimizers=minimizers,
        unique=len(structures) == 1,
        certified=n_max <= CERTIFIED_N_MAX,
        elapsed_seconds=time.perf_counter() - start,
    )
    logger.info(
        f"Global minimum {format_rational(report.global_minimum.value)} at "
        f"{report.global_minimum.endpoints.to_text()} (unique: {report.unique})"
    )
    return report


@dataclass(frozen=True)
class PointCertificate:
    is_critical: bool
    value: Fraction
    gradient: Tuple[Fraction, ...]
    configuration: Configuration

    def to_json(self) -> dict:
        return {
            "is_critical": self.is_critical,
            "value": format_rational(self.value),
            "gradient": [format_rational(g) for g in self.gradient],
            "configuration": self.configuration.serialize(),
        }


def certify_point(e: Endpoints) -> PointCertificate:
    """
    Exact value and gradient of the piece whose chamber contains ``e``.

    Raises:
        TieError: ``e`` lies on a chamber wall
    """
    cfg = derive_configuration(e)
    form = mono_fraction_form(cfg)
    point = e.free()
    gradient = qf_gradient(form, point, sorted(point))
    return PointCertificate(
        is_critical=all(g == 0 for g in gradient),
        value=form.evaluate(point),
        gradient=gradient,
        configuration=cfg,
    )
