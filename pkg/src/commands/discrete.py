from app import app
from core.diagram import Endpoints
from core.discrete import (
    DiscreteColoring,
    ap_counts,
    bead_fraction,
    discretize,
    fraction_mono,
    offby1_relation_check,
)
from core.exact import format_rational
from utils.command_utils import arg, read_lines


def _summary(coloring: DiscreteColoring, bead: bool) -> dict:
    counts = ap_counts(coloring)
    value = bead_fraction(coloring) if bead else fraction_mono(coloring)
    return {
        "coloring": str(coloring) if coloring.N <= 64 else None,
        "N": counts.N,
        "blocks": coloring.block_count(),
        "mode": "bead" if bead else "discrete",
        "value": format_rational(value),
        "m3": counts.m3,
        "ap3_total": counts.ap3_total,
        "m3_prime": counts.m3_prime,
        "offby1_total": counts.offby1_total,
        "offby1_defect": offby1_relation_check(coloring).defect,
    }


@app.command(
    name="discrete",
    help="Exact 3-AP counts and monochromatic fractions of colourings of [N]",
    arguments=[
        arg("--coloring", help="Colouring over R and B, e.g. RRBB"),
        arg("--file", help="File with one colouring per line"),
        arg("--endpoints", help="Discretise this block colouring instead (needs --N)"),
        arg("--N", dest="size", type=int, help="Length of the discretisation"),
        arg("--bead", action="store_true", help="Report (m3 + m3'/2)/N^2 instead of m3/|AP|"),
    ],
)
def cmd_discrete(args) -> dict:
    sources = [s for s in (args.coloring, args.file, args.endpoints) if s is not None]
    if len(sources) != 1:
        raise ValueError("Give exactly one of --coloring, --file or --endpoints")

    if args.endpoints is not None:
        if args.size is None:
            raise ValueError("--endpoints needs --N")
        endpoints = Endpoints.parse(args.endpoints)
        coloring = discretize(endpoints, args.size)
        return {"endpoints": endpoints.to_text(), **_summary(coloring, args.bead)}
    if args.coloring is not None:
        return _summary(DiscreteColoring.parse(args.coloring), args.bead)
    colorings = [DiscreteColoring.parse(line) for line in read_lines(args.file)]
    return {"results": [_summary(c, args.bead) for c in colorings]}
