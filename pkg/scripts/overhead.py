"""Runtime overhead of the involution model over the inertial one.

Thin wrapper over the bench harness with smaller defaults so it finishes
in a couple of minutes; pass --transitions 200000 --repetitions 30 for the
full workload.
"""

import argparse
import csv
import sys

from idmsim.bench import BenchSpec, bench_table, run_bench


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--circuit", default="adder", choices=["adder", "tree", "buffer"])
    ap.add_argument("--multipliers", default="1,2,4,10")
    ap.add_argument("--transitions", type=int, default=20_000)
    ap.add_argument("--repetitions", type=int, default=5)
    args = ap.parse_args(argv)

    spec = BenchSpec(args.circuit, [int(m) for m in args.multipliers.split(",")],
                     args.transitions, args.repetitions)
    header, rows = bench_table(run_bench(spec, lambda s: print(s, file=sys.stderr)))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


if __name__ == "__main__":
    main()
