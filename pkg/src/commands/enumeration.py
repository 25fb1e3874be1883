import os

from app import app, logger
from config import SOLVER
from core.enumerator import cache_path, enumerate_configurations, resume, write_cache
from utils.command_utils import RunConfig, arg


@app.command(
    name="enumerate",
    help="Enumerate every chamber for an even block count and write the cache file",
    arguments=[
        arg("--n", type=int, required=True, help="Even block count"),
        arg("--out", help="Cache file (default: <cache dir>/configs_n<N>.txt)"),
        arg("--cache-dir", dest="cache_dir", help="Cache directory"),
        arg("--checkpoint", help="Checkpoint file written after every pair step"),
        arg("--resume", action="store_true", help="Continue from --checkpoint"),
        arg("--workers", type=int, help="Worker processes (default: MONOAP_WORKERS)"),
        arg("--mirror", action="store_true", help="Place mirror pairs together"),
        arg("--order", choices=["span", "lex"], default="span", help="Pair processing order"),
        arg("--max-steps", dest="max_steps", type=int, help="Stop after this many pair steps (needs --checkpoint)"),
        arg("--progress", action="store_true", default=None, help="Show progress bars"),
    ],
)
def cmd_enumerate(args) -> dict:
    config = RunConfig.from_args(args)
    out = config.out or cache_path(config.cache_dir, config.n)
    options = dict(
        parallel_workers=config.workers,
        lp_time_budget=SOLVER.LP.TIME_BUDGET,
        hard_system_dir=SOLVER.LP.HARD_SYSTEM_DIR,
        progress=config.progress,
        max_steps=args.max_steps,
    )

    if config.resume:
        if not config.checkpoint:
            raise ValueError("--resume needs --checkpoint")
        if not os.path.exists(config.checkpoint):
            raise FileNotFoundError(f"Checkpoint not found: {config.checkpoint}")
        result = resume(config.checkpoint, **options)
        if result.n != config.n:
            raise ValueError(f"Checkpoint is for n={result.n}, not n={config.n}")
    else:
        result = enumerate_configurations(
            config.n,
            checkpoint_path=config.checkpoint,
            use_mirror_symmetry=config.mirror,
            order=args.order,
            **options,
        )

    if not result.complete:
        logger.info(f"Enumeration of n={config.n} paused; continue with --resume")
        return {"n": config.n, "count": result.count, "complete": False}

    write_cache(out, config.n, result.configurations)
    logger.info(f"Enumerated n={config.n}: {result.count} configurations -> {out}")
    return {"n": config.n, "count": result.count}
