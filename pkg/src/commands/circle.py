from app import app
from core.discrete import CircleColoring, circle_mono_fraction, circle_monte_carlo
from core.exact import format_rational, parse_rational
from utils.command_utils import RunConfig, arg
from utils.persistent_store import PersistentStore


@app.command(
    name="circle",
    help="Monochromatic measure of a circle colouring, exact and by Monte Carlo",
    arguments=[
        arg("--p", help="Red measure p/q of a two-arc colouring"),
        arg("--arcs", help="JSON file with a list of {start, length, color}"),
        arg("--samples", type=int, help="Monte Carlo samples"),
        arg("--seed", type=int, help="Monte Carlo seed"),
    ],
)
def cmd_circle(args) -> dict:
    if (args.p is None) == (args.arcs is None):
        raise ValueError("Give exactly one of --p or --arcs")
    config = RunConfig.from_args(args)
    if args.p is not None:
        coloring = CircleColoring.two_arc(parse_rational(args.p))
    else:
        coloring = CircleColoring.from_json(PersistentStore.read_json(args.arcs))
    p = coloring.red_measure
    estimate = circle_monte_carlo(coloring, config.samples, config.seed)
    return {
        "p": format_rational(p),
        "exact": format_rational(circle_mono_fraction(p)),
        "arcs": coloring.to_json(),
        "monte_carlo": estimate.to_json(),
    }
