"""Ripple-carry adder: pulse degradation along S0..S4.

The involution model is run for a few pulse widths on A0 and the first
output pulse width per sum bit is printed.  The inertial model is then
scanned in 1 fs steps to find widths where the set of sum bits that see
the pulse changes by two or more signals at once.
"""

import argparse

from idmsim.analysis import check_causal_order, degradation_profile
from idmsim.core import FS, PS, Model
from idmsim.engine import SimConfig
from idmsim.experiments import adder_circuit, adder_signals, adder_stimulus, propagated, runner


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--direction", choices=["up", "down"], default="up")
    ap.add_argument("--widths", default="10,12,14,16,20", help="idm pulse widths, ps")
    ap.add_argument("--scan", default="7.9,8.4", help="inertial 1 fs scan range, ps")
    args = ap.parse_args(argv)

    sig = adder_signals()
    c = adder_circuit(args.direction)
    idm = runner(c, SimConfig(Model.IDM_EXP, t_end=1000 * PS))
    print("width_ps," + ",".join(sig) + ",causal")
    for w in args.widths.split(","):
        res = idm(adder_stimulus(args.direction, round(float(w) * PS)))
        prof = degradation_profile(res.trace, sig)
        bad = check_causal_order(res.trace, sig)
        print(w + "," + ",".join("NONE" if prof[s] is None else str(prof[s]) for s in sig)
              + "," + ("ok" if bad is None else f"{bad[0]}<{bad[1]}"))

    lo, hi = (round(float(x) * PS) for x in args.scan.split(","))
    inert = runner(c, SimConfig(Model.INERTIAL, t_end=1000 * PS))
    prev = None
    for w in range(lo, hi + 1, FS):
        cur = propagated(inert(adder_stimulus(args.direction, w)), sig)
        if prev is not None and len(cur ^ prev) >= 2:
            print(f"inertial jump at {w} as: {sorted(prev)} -> {sorted(cur)}")
        prev = cur


if __name__ == "__main__":
    main()
