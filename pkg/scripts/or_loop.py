"""Critical pulse width of the OR loop and the pulse trains on either side.

Bisects the input width that decides whether the loop latches, then prints
the HI/LO widths of node A for both bracket ends, and the number of
transitions the inertial model produces at node B over a coarse sweep.
"""

import argparse

from idmsim.analysis import classify, first_differences, train_of
from idmsim.core import PS, Model
from idmsim.engine import SimConfig, pulse
from idmsim.experiments import PULSE_START, or_loop_bisect, runner
from idmsim.netlist import build_or_loop


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--feedback", type=int, default=30, help="buffers in the loop")
    ap.add_argument("--t-end", type=float, default=20_000, help="horizon, ps")
    args = ap.parse_args(argv)

    circuit = build_or_loop(args.feedback)
    cfg = SimConfig(Model.IDM_EXP, t_end=round(args.t_end * PS))
    b = or_loop_bisect(args.feedback, config=cfg)
    print(f"bracket_as={b.low},{b.high}")
    run = runner(circuit, cfg)
    gate = circuit.gate("OR").params
    for w in b.bracket:
        train = train_of(run(pulse("I", PULSE_START, w)), "A")
        print(f"\nwidth {w} as: {len(train)} periods, verdict {classify(train, gate).kind.value}")
        print("n,hi_as,lo_as")
        for n, (hi, lo) in enumerate(train.entries, 1):
            print(f"{n},{hi},{'' if lo is None else lo}")
        print("hi first differences:", first_differences(train.highs))

    inert = runner(circuit, SimConfig(Model.INERTIAL, t_end=round(args.t_end * PS)))
    counts = {inert(pulse("I", PULSE_START, w)).trace.count("B")
              for w in range(50 * PS, 150 * PS + 1, PS)}
    print(f"\ninertial transitions at B over 50..150 ps: {sorted(counts)}")


if __name__ == "__main__":
    main()
