"""
Chamber enumeration for antisymmetric block colourings.

Pairs ``(i, j)`` are placed one at a time. A partial configuration survives a step
when the strict system ``0 < x_1 < ... < 1/2`` plus every placement
``2x_k < x_i + x_j < 2x_{k+1}`` made so far is exactly feasible. Each survivor keeps
the witness point of its last certificate; when that witness already places the new
pair strictly, the branch is admitted with the same witness and no LP is solved.
"""

import logging
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from core.diagram import Configuration, config_pairs, endpoint_expr
from core.exact import LinearExpr, format_rational, parse_rational
from core.lp import Constraint, LPProblem, LPStatus, Relation, check_feasible_strict
from utils.parallel import apply_pool
from utils.persistent_store import PersistentStore


logger = logging.getLogger(__name__)

CACHE_VERSION = 1
CHECKPOINT_VERSION = 1

Pair = Tuple[int, int]


class CheckpointError(ValueError):
    """Raised for unreadable, tampered or incompatible checkpoint files."""


def _check_n(n: int) -> None:
    if n < 0 or n % 2:
        raise ValueError(f"Enumeration needs an even n >= 0, got {n}")


def free_variables(n: int) -> Tuple[int, ...]:
    return tuple(range(1, n // 2)) if n >= 2 else ()


def pair_processing_order(n: int, order: str = "span") -> List[Pair]:
    """
    Processing order of the configuration pairs.

    Args:
        n: Even block count
        order: ``"span"`` for decreasing ``j - i`` then lexicographic (default),
            ``"lex"`` for plain lexicographic

    Returns:
        Every pair ``i < j <= n`` with ``i + j != n``
    """
    _check_n(n)
    pairs = config_pairs(n)
    if order == "lex":
        return pairs
    if order != "span":
        raise ValueError(f"Unknown pair order {order!r}")
    return sorted(pairs, key=lambda p: (p[0] - p[1], p))


def base_constraints(n: int) -> List[Constraint]:
    """Strict chain ``x_0 < x_1 < ... < x_{n/2}`` in free variables."""
    if n == 0:
        return []
    return [
        Constraint.build(endpoint_expr(n, v), Relation.LT, endpoint_expr(n, v + 1))
        for v in range(n // 2)
    ]


def placement_constraints(n: int, i: int, j: int, k: int, strict: bool = True) -> List[Constraint]:
    """``2x_k < x_i + x_j < 2x_{k+1}`` in free variables (``<=`` when not strict)."""
    relation = Relation.LT if strict else Relation.LE
    total = endpoint_expr(n, i) + endpoint_expr(n, j)
    return [
        Constraint.build(2 * endpoint_expr(n, k), relation, total),
        Constraint.build(total, relation, 2 * endpoint_expr(n, k + 1)),
    ]


def region_constraints(cfg: Configuration, strict: bool = True) -> List[Constraint]:
    """Chain plus every placement of ``cfg``; the closure when ``strict`` is False."""
    constraints = base_constraints(cfg.n)
    if not strict:
        constraints = [c.closed() for c in constraints]
    for (i, j), k in cfg.kappa.items():
        constraints.extend(placement_constraints(cfg.n, i, j, k, strict))
    return constraints


def region_problem(cfg: Configuration, strict: bool = True) -> LPProblem:
    n = cfg.n
    box = {v: (Fraction(0), Fraction(1, 2)) for v in free_variables(n)}
    return LPProblem(free_variables(n), tuple(region_constraints(cfg, strict)), box=box)


@dataclass(frozen=True)
class PartialConfiguration:
    """Placements made so far plus the witness of the last feasibility certificate."""

    n: int
    assigned: Tuple[Tuple[Pair, int], ...] = ()
    witness: Dict[int, Fraction] = field(default_factory=dict, compare=False)

    @property
    def base_constraints(self) -> List[Constraint]:
        return base_constraints(self.n)

    @property
    def kappa(self) -> Dict[Pair, int]:
        return dict(self.assigned)

    def constraints(self) -> List[Constraint]:
        result = self.base_constraints
        for (i, j), k in self.assigned:
            result.extend(placement_constraints(self.n, i, j, k))
        return result

    def problem(self, extra: Sequence[Constraint] = ()) -> LPProblem:
        box = {v: (Fraction(0), Fraction(1, 2)) for v in free_variables(self.n)}
        return LPProblem(
            free_variables(self.n), tuple(self.constraints()) + tuple(extra), box=box
        )

    def extend(self, pair: Pair, k: int, witness: Dict[int, Fraction]) -> "PartialConfiguration":
        i, j = pair
        if not i <= k <= j - 1:
            raise ValueError(f"kappa({i}, {j}) = {k} outside [{i}, {j - 1}]")
        return PartialConfiguration(self.n, self.assigned + ((pair, k),), dict(witness))

    def to_configuration(self) -> Configuration:
        return Configuration(self.n, self.kappa)

    def serialize(self) -> str:
        return self.to_configuration().serialize()

    def to_line(self) -> str:
        """``<configuration> @ <witness>`` as stored in checkpoints."""
        entries = ";".join(f"{i},{j}:{k}" for (i, j), k in self.assigned)
        point = ",".join(f"x{v}={format_rational(x)}" for v, x in sorted(self.witness.items()))
        return f"{entries} @ {point or '-'}"

    @classmethod
    def from_line(cls, n: int, line: str) -> "PartialConfiguration":
        body, sep, point = line.partition(" @ ")
        if not sep:
            raise CheckpointError(f"Malformed survivor line {line!r}")
        try:
            cfg = Configuration.parse(n, body)
            order = [] if not body.strip() else [
                tuple(int(t) for t in entry.split(":")[0].split(",")) for entry in body.split(";")
            ]
            witness = {}
            if point.strip() != "-":
                for item in point.split(","):
                    name, value = item.split("=")
                    witness[int(name.lstrip("x"))] = parse_rational(value)
        except (ValueError, ZeroDivisionError) as e:
            raise CheckpointError(f"Malformed survivor line {line!r}: {e}") from e
        return cls(n, tuple((pair, cfg.kappa[pair]) for pair in order), witness)


@dataclass
class EnumerationCheckpoint:
    n: int
    pair_order: List[Pair]
    next_pair_index: int
    survivors: List[PartialConfiguration]
    use_mirror_symmetry: bool = False

    def to_text(self) -> str:
        lines = [
            f"version={CHECKPOINT_VERSION} n={self.n} mirror={int(self.use_mirror_symmetry)}",
            "order=" + ";".join(f"{i},{j}" for i, j in self.pair_order),
            f"next={self.next_pair_index}",
            f"survivors={len(self.survivors)}",
        ]
        lines.extend(s.to_line() for s in self.survivors)
        body = "\n".join(lines) + "\n"
        return body + f"sha256={PersistentStore.digest(body)}\n"

    def save(self, path: str) -> None:
        PersistentStore.write_text(path, self.to_text())
        logger.info(
            f"Checkpoint n={self.n} at pair {self.next_pair_index}/{len(self.pair_order)} "
            f"with {len(self.survivors)} survivors -> {path}"
        )

    @classmethod
    def from_text(cls, text: str) -> "EnumerationCheckpoint":
        body, sep, seal = text.rpartition("sha256=")
        if not sep or PersistentStore.digest(body) != seal.strip():
            raise CheckpointError("Checkpoint digest mismatch; the file is corrupt or was edited")
        lines = body.rstrip("\n").split("\n")
        try:
            header = dict(item.split("=") for item in lines[0].split())
            if int(header["version"]) != CHECKPOINT_VERSION:
                raise CheckpointError(f"Unsupported checkpoint version {header['version']}")
            n = int(header["n"])
            mirror = bool(int(header.get("mirror", "0")))
            order_text = lines[1].partition("order=")[2]
            pair_order = [
                tuple(int(t) for t in item.split(",")) for item in order_text.split(";") if item
            ]
            next_index = int(lines[2].partition("next=")[2])
            count = int(lines[3].partition("survivors=")[2])
        except (IndexError, KeyError, ValueError) as e:
            raise CheckpointError(f"Malformed checkpoint header: {e}") from e
        survivor_lines = lines[4:]
        if len(survivor_lines) != count:
            raise CheckpointError(f"Checkpoint lists {count} survivors but has {len(survivor_lines)}")
        if sorted(pair_order) != sorted(config_pairs(n)) or not 0 <= next_index <= len(pair_order):
            raise CheckpointError("Checkpoint pair order does not match n")
        survivors = [PartialConfiguration.from_line(n, line) for line in survivor_lines]
        return cls(n, pair_order, next_index, survivors, mirror)

    @classmethod
    def load(cls, path: str) -> "EnumerationCheckpoint":
        return cls.from_text(PersistentStore.read_text(path))


@dataclass(frozen=True)
class EnumerationResult:
    n: int
    count: int
    configurations: List[Configuration]
    lp_solves: int = 0
    shortcuts: int = 0
    complete: bool = True


def _certify_candidate(problem: LPProblem, time_budget: Optional[float]):
    """Worker entry point: one strict feasibility check, timed."""
    start = time.perf_counter()
    result = check_feasible_strict(problem)
    elapsed = time.perf_counter() - start
    slow = time_budget is not None and elapsed > time_budget
    return result, elapsed, slow


def _record_hard_system(problem: LPProblem, directory: str, tag: str, elapsed: float) -> None:
    path = os.path.join(directory, f"hard_{tag}.lp")
    PersistentStore.write_text(path, f"# solve time {elapsed:.3f}s\n" + problem.to_text())
    logger.warning(f"LP solve took {elapsed:.1f}s; system recorded verbatim at {path}")


def _strictly_places(witness: Dict[int, Fraction], n: int, pair: Pair, k: int) -> bool:
    if set(witness) != set(free_variables(n)):
        return False
    return all(c.is_satisfied(witness) for c in placement_constraints(n, pair[0], pair[1], k))


def _candidate_range(partial: PartialConfiguration, pair: Pair) -> range:
    """Values of ``kappa(pair)`` not excluded by monotonicity in both indices."""
    i, j = pair
    low, high = i, j - 1
    for (a, b), k in partial.assigned:
        if a <= i and b <= j:
            low = max(low, k)
        if a >= i and b >= j:
            high = min(high, k)
    return range(low, high + 1)


def _mirror(n: int, pair: Pair) -> Pair:
    return (n - pair[1], n - pair[0])


def enumerate_configurations(
    n: int,
    parallel_workers: int = 1,
    checkpoint_path: Optional[str] = None,
    use_mirror_symmetry: bool = False,
    order: str = "span",
    lp_time_budget: Optional[float] = None,
    hard_system_dir: Optional[str] = None,
    progress: bool = False,
    checkpoint: Optional[EnumerationCheckpoint] = None,
    max_steps: Optional[int] = None,
) -> EnumerationResult:
    """
    Every feasible configuration for even ``n``, in sorted serialisation order.

    Args:
        n: Even block count
        parallel_workers: Processes used for the LP checks of one pair step
        checkpoint_path: Where to store a checkpoint after every pair step
        use_mirror_symmetry: Place only one pair of each mirror pair and derive the
            other as ``kappa(n-j, n-i) = n-1-kappa(i, j)``
        order: Pair processing order, see ``pair_processing_order``
        lp_time_budget: Seconds after which a solve is recorded as hard
        hard_system_dir: Directory for recorded hard systems
        progress: Show progress bars
        checkpoint: State to continue from (see ``resume``)
        max_steps: Stop after this many pair steps, leaving the checkpoint behind

    Returns:
        The count, the configurations and solver statistics
    """
    _check_n(n)
    if parallel_workers < 1:
        raise ValueError("parallel_workers must be at least 1")

    if checkpoint is not None:
        if checkpoint.n != n:
            raise CheckpointError(f"Checkpoint is for n={checkpoint.n}, not n={n}")
        pair_order = list(checkpoint.pair_order)
        start = checkpoint.next_pair_index
        survivors = list(checkpoint.survivors)
        use_mirror_symmetry = checkpoint.use_mirror_symmetry
        logger.info(f"Resuming n={n} at pair {start}/{len(pair_order)} with {len(survivors)} survivors")
    else:
        pair_order = pair_processing_order(n, order)
        start = 0
        root = PartialConfiguration(n)
        seed = check_feasible_strict(root.problem())
        if seed.kind is not LPStatus.FEASIBLE:
            raise RuntimeError(f"Base chain for n={n} is infeasible")
        survivors = [PartialConfiguration(n, (), seed.witness)]

    lp_solves = 0
    shortcuts = 0
    for index in range(start, len(pair_order)):
        if max_steps is not None and index - start >= max_steps:
            if not checkpoint_path:
                raise ValueError("max_steps needs a checkpoint_path to continue from")
            EnumerationCheckpoint(n, pair_order, index, survivors, use_mirror_symmetry).save(
                checkpoint_path
            )
            logger.info(f"Stopped n={n} after {max_steps} pair steps; resume from {checkpoint_path}")
            return EnumerationResult(n, 0, [], lp_solves, shortcuts, complete=False)
        pair = pair_order[index]
        mirror = _mirror(n, pair)
        if use_mirror_symmetry and mirror < pair:
            # Placed together with its representative
            if checkpoint_path:
                EnumerationCheckpoint(n, pair_order, index + 1, survivors, use_mirror_symmetry).save(
                    checkpoint_path
                )
            continue

        admitted: List[Optional[PartialConfiguration]] = []
        tasks = []
        for s, partial in enumerate(survivors):
            forced = partial.kappa.get(mirror)
            candidates = (
                [n - 1 - forced] if forced is not None else list(_candidate_range(partial, pair))
            )
            for k in candidates:
                if _strictly_places(partial.witness, n, pair, k):
                    admitted.append(partial.extend(pair, k, partial.witness))
                    shortcuts += 1
                    continue
                problem = partial.problem(placement_constraints(n, pair[0], pair[1], k))
                tasks.append((len(admitted), partial, k, problem))
                admitted.append(None)

        outcomes = apply_pool(
            _certify_candidate,
            [(problem, lp_time_budget) for _, _, _, problem in tasks],
            workers=parallel_workers,
            verbose=progress,
            desc=f"n={n} pair {index + 1}/{len(pair_order)}",
        )
        lp_solves += len(tasks)
        for (slot, partial, k, problem), (result, elapsed, slow) in zip(tasks, outcomes):
            if slow and hard_system_dir:
                _record_hard_system(problem, hard_system_dir, f"n{n}_p{index}_s{slot}", elapsed)
            if result.kind is LPStatus.FEASIBLE:
                admitted[slot] = partial.extend(pair, k, result.witness)

        survivors = [p for p in admitted if p is not None]
        if use_mirror_symmetry:
            survivors = [
                p.extend(mirror, n - 1 - p.kappa[pair], p.witness) for p in survivors
            ]
        logger.info(
            f"n={n} pair {index + 1}/{len(pair_order)} {pair}: {len(survivors)} survivors"
        )
        if checkpoint_path:
            EnumerationCheckpoint(n, pair_order, index + 1, survivors, use_mirror_symmetry).save(
                checkpoint_path
            )

    configurations = [_certify_complete(p) for p in survivors]
    configurations.sort(key=lambda cfg: cfg.serialize())
    serialized = [cfg.serialize() for cfg in configurations]
    if len(set(serialized)) != len(serialized):
        raise RuntimeError(f"Duplicate configurations emitted for n={n}")
    logger.info(f"n={n}: {len(configurations)} configurations ({lp_solves} LP solves, {shortcuts} shortcuts)")
    return EnumerationResult(n, len(configurations), configurations, lp_solves, shortcuts)


def _certify_complete(partial: PartialConfiguration) -> Configuration:
    """Re-check a finished survivor: complete, and its witness strictly inside every constraint."""
    cfg = partial.to_configuration()
    if not cfg.is_complete():
        raise RuntimeError(f"Incomplete configuration emitted: {cfg.serialize()}")
    witness = partial.witness
    problem = region_problem(cfg)
    if not (
        set(witness) == set(problem.variables)
        and problem.in_box(witness)
        and all(c.is_satisfied(witness) for c in problem.constraints)
    ):
        result = check_feasible_strict(problem)
        if result.kind is not LPStatus.FEASIBLE:
            raise RuntimeError(f"Emitted configuration is not strictly feasible: {cfg.serialize()}")
    return cfg


def resume(checkpoint_path: str, **options) -> EnumerationResult:
    """Continue an enumeration from ``checkpoint_path``; the result equals an uninterrupted run."""
    checkpoint = EnumerationCheckpoint.load(checkpoint_path)
    options.setdefault("checkpoint_path", checkpoint_path)
    return enumerate_configurations(checkpoint.n, checkpoint=checkpoint, **options)


def cache_path(directory: str, n: int) -> str:
    return os.path.join(directory, f"configs_n{n}.txt")


def write_cache(path: str, n: int, configurations: Sequence[Configuration]) -> None:
    lines = sorted(cfg.serialize() for cfg in configurations)
    header = f"n={n} count={len(lines)} version={CACHE_VERSION}"
    PersistentStore.write_text(path, "\n".join([header] + lines) + "\n")
    logger.info(f"Cached {len(lines)} configurations for n={n} at {path}")


def read_cache(path: str) -> Tuple[int, List[Configuration]]:
    """
    Read a configuration cache.

    Returns:
        ``(n, configurations)`` with configurations in file order

    Raises:
        ValueError: Bad header, count mismatch or unsorted lines
    """
    text = PersistentStore.read_text(path)
    # The n = 0 configuration serialises to an empty line, so only the final newline goes
    lines = (text[:-1] if text.endswith("\n") else text).split("\n")
    try:
        header = dict(item.split("=") for item in lines[0].split())
        n, count, version = int(header["n"]), int(header["count"]), int(header["version"])
    except (KeyError, ValueError) as e:
        raise ValueError(f"Malformed cache header in {path}: {lines[0]!r}") from e
    if version != CACHE_VERSION:
        raise ValueError(f"Unsupported cache version {version} in {path}")
    body = lines[1 : 1 + count]
    if len(body) != count or any(line.strip() for line in lines[1 + count :]):
        raise ValueError(f"Cache {path} does not hold exactly {count} configurations")
    if body != sorted(body):
        raise ValueError(f"Cache {path} is not in sorted order")
    return n, [Configuration.parse(n, line) for line in body]
