"""Output pulse width against input pulse width for one OR-gate channel.

Writes one CSV row per input width with the output width under each model
(empty when the pulse is cancelled), then the critical width of the
involution channel found by bisection.
"""

import argparse
import csv
import sys

from idmsim.analysis import find_critical_width, propagates
from idmsim.core import PS, ChannelParams, Model
from idmsim.engine import SimConfig, pulse, run_sweep, simulate
from idmsim.experiments import PULSE_START
from idmsim.netlist import build_buffer


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--up", type=float, default=4.6, help="rising delay, ps")
    ap.add_argument("--down", type=float, default=5.8, help="falling delay, ps")
    ap.add_argument("--pure", type=float, default=1.0, help="pure delay part, ps")
    ap.add_argument("--vth", type=float, default=0.5)
    ap.add_argument("--stop", type=float, default=20.0, help="largest input width, ps")
    ap.add_argument("--step", type=float, default=0.1, help="sweep step, ps")
    ap.add_argument("--out", help="CSV file (default stdout)")
    args = ap.parse_args(argv)

    params = ChannelParams.ps(args.up, args.down, args.pure, args.vth)
    factory = lambda: build_buffer({"buf": params})
    step = round(args.step * PS)
    widths = list(range(step, round(args.stop * PS) + 1, step))
    cols = {m: run_sweep(factory, widths, SimConfig(m, t_end=400 * PS)) for m in Model}

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["delta_i_as"] + [f"{m.value}_delta_o_as" for m in Model])
    for i, width in enumerate(widths):
        w.writerow([width] + ["" if cols[m][i].delta_o is None else cols[m][i].delta_o
                             for m in Model])
    if out is not sys.stdout:
        out.close()

    c = factory()
    cfg = SimConfig(Model.IDM_EXP, t_end=400 * PS)
    b = find_critical_width(lambda x: simulate(c, pulse("I", PULSE_START, x), cfg), "O",
                            1, round(args.stop * PS), predicate=propagates)
    print(f"idm critical width bracket (as): {b.low} {b.high}", file=sys.stderr)


if __name__ == "__main__":
    main()
