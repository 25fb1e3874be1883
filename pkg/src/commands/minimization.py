from app import app, logger
from core.exact import format_rational
from core.optimizer import global_minimize
from utils.command_utils import RunConfig, arg
from utils.persistent_store import PersistentStore


@app.command(
    name="minimize",
    help="Exact global minimum over antisymmetric colourings with at most n-max blocks",
    arguments=[
        arg("--n-max", dest="n_max", type=int, required=True, help="Largest even block count"),
        arg("--cache-dir", dest="cache_dir", help="Configuration cache directory"),
        arg("--offline", action="store_true", help="Fail when a cache is missing"),
        arg("--workers", type=int, help="Worker processes (default: MONOAP_WORKERS)"),
        arg("--report", help="Write the full report JSON here"),
        arg("--uncertified", action="store_true", help="Allow n-max above 12"),
        arg("--progress", action="store_true", default=None, help="Show progress bars"),
    ],
)
def cmd_minimize(args) -> dict:
    config = RunConfig.from_args(args)
    report = global_minimize(
        config.n_max,
        config_cache_dir=config.cache_dir,
        parallel_workers=config.workers,
        offline=config.offline,
        uncertified=config.uncertified,
        progress=config.progress,
    )
    if config.report:
        PersistentStore.write_json(config.report, report.to_json())
        logger.info(f"Report written to {config.report}")
    best = report.global_minimum
    return {
        "n_max": config.n_max,
        "value": format_rational(best.value),
        "n": best.n,
        "endpoints": [format_rational(v) for v in best.endpoints.x],
        "unique": report.unique,
        "certified": report.certified,
    }
