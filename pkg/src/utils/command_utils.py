import json
import os
import sys
from enum import IntEnum
from typing import Any, Dict, List, Optional, TextIO, Tuple

from pydantic import BaseModel, Field, field_validator

from config import APP, SOLVER
from core.diagram import TieError


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    IO = 2
    INTERNAL = 3
    DEGENERATE = 4


def exit_code_for(error: BaseException) -> ExitCode:
    """
    Map an exception to the command-line exit code.

    Args:
        error: The exception raised by a command

    Returns:
        DEGENERATE for ties, USAGE for other bad input, IO for file problems and
        INTERNAL for everything else
    """
    if isinstance(error, TieError):
        return ExitCode.DEGENERATE
    if isinstance(error, (ValueError, ZeroDivisionError)):
        return ExitCode.USAGE
    if isinstance(error, OSError):
        return ExitCode.IO
    return ExitCode.INTERNAL


def emit_json(payload: Dict[str, Any], stream: Optional[TextIO] = None) -> None:
    """Print one JSON document with stable key order to stdout."""
    stream = stream or sys.stdout
    stream.write(json.dumps(payload, ensure_ascii=False) + "\n")
    stream.flush()


def arg(*flags: str, **kwargs) -> Tuple[Tuple[str, ...], Dict[str, Any]]:
    """Argument spec for ``CommandLineApp.command``; mirrors ``add_argument``."""
    return flags, kwargs


def read_lines(path: str) -> List[str]:
    with open(path, "r", encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


class RunConfig(BaseModel):
    """Validated options of one command invocation."""

    command: str = Field(..., description="Subcommand name")
    n: Optional[int] = Field(None, description="Block count for enumeration")
    n_max: Optional[int] = Field(None, description="Largest block count for minimisation")
    workers: int = Field(APP.WORKERS, ge=1, description="Worker processes")
    seed: int = Field(SOLVER.MONTE_CARLO.SEED, description="Monte Carlo seed")
    samples: int = Field(SOLVER.MONTE_CARLO.SAMPLES, ge=1, description="Monte Carlo sample count")
    out: Optional[str] = Field(None, description="Output file")
    checkpoint: Optional[str] = Field(None, description="Checkpoint file")
    cache_dir: str = Field(APP.CACHE.CACHE_DIR, description="Configuration cache directory")
    report: Optional[str] = Field(None, description="Report file")
    mirror: bool = False
    uncertified: bool = False
    resume: bool = False
    offline: bool = False
    progress: bool = APP.PROGRESS

    @field_validator("n", "n_max")
    @classmethod
    def _even(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and (value < 0 or value % 2):
            raise ValueError(f"must be an even number >= 0, got {value}")
        return value

    @field_validator("out", "checkpoint", "report")
    @classmethod
    def _file_path(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        if os.path.isdir(value):
            raise ValueError(f"{value} is a directory, expected a file path")
        parent = os.path.dirname(os.path.abspath(value))
        if not os.path.isdir(parent):
            raise ValueError(f"parent directory {parent} does not exist")
        return value

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        """Build from an argparse namespace; unset flags fall back to the environment."""
        values = {
            key: value
            for key, value in vars(args).items()
            if key in cls.model_fields and value is not None
        }
        return cls(**values)
