from app import app
from core.diagram import Endpoints, evaluate_f
from core.discrete import interval_monte_carlo
from core.exact import format_rational
from core.optimizer import certify_point
from utils.command_utils import RunConfig, arg


@app.command(
    name="eval",
    help="Exact monochromatic measure of a block colouring",
    arguments=[
        arg("--endpoints", required=True, help="Comma separated endpoints, e.g. 0,1/2,1"),
        arg("--samples", type=int, help="Also report a Monte Carlo estimate with this many samples"),
        arg("--seed", type=int, help="Monte Carlo seed"),
    ],
)
def cmd_eval(args) -> dict:
    endpoints = Endpoints.parse(args.endpoints)
    payload = {"n": endpoints.n, "value": format_rational(evaluate_f(endpoints))}
    if args.samples is not None:
        config = RunConfig.from_args(args)
        payload["monte_carlo"] = interval_monte_carlo(endpoints, config.samples, config.seed).to_json()
    return payload


@app.command(
    name="certify",
    help="Exact value and gradient of the piece containing antisymmetric endpoints",
    arguments=[arg("--endpoints", required=True, help="Comma separated endpoints")],
)
def cmd_certify(args) -> dict:
    endpoints = Endpoints.parse(args.endpoints)
    return {"n": endpoints.n, **certify_point(endpoints).to_json()}
