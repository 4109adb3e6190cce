"""Command-line entry point.

Exit codes: 0 success, 1 bad input (files, flags, stimuli), 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import bench as benchmod
from . import experiments as ex
from .analysis import (check_causal_order, classify, degradation_profile, find_critical_width,
                       propagates, settles_flipped, train_of)
from .channel import ChannelError
from .core import LO, PS, InvariantViolation, Model, Transition, parse_time
from .engine import SimConfig, SimulationError, StimulusError, pulse, run_sweep, simulate
from .fastsim import FlatCircuit, fast_simulate
from .formats import (ParseError, bind_delays, parse_delays, parse_netlist, parse_stimulus,
                      write_profile_csv, write_rows_csv, write_sweep_csv, write_train_csv,
                      write_trace_csv, write_vcd)
from .netlist import (Circuit, NetlistError, adder_operands, build_adder, build_buffer,
                      build_clock_tree, build_or_loop, build_sr_latch, with_settled_inputs)

log = logging.getLogger("idmsim")


class InputError(Exception):
    """Bad flag value or unreadable file."""


INPUT_ERRORS = (InputError, ParseError, NetlistError, StimulusError, InvariantViolation,
                ValueError, KeyError, OSError, OverflowError)
INTERNAL_ERRORS = (SimulationError, ChannelError, RuntimeError, AssertionError)


@dataclass
class RunSpec:
    circuit: str
    stimulus: Optional[str] = None
    delays: Optional[str] = None
    model: Model = Model.IDM_EXP
    t_end: int = 10**6 * PS
    max_events: int = 10**7
    vcd: Optional[str] = None
    csv: Optional[str] = None
    timescale: str = "1fs"
    seed: int = 0
    record_internal: bool = True
    fast: bool = False

    def config(self) -> SimConfig:
        return SimConfig(self.model, self.t_end, self.max_events, self.record_internal)


# --- argument helpers ---------------------------------------------------------

def _kv(text: str) -> Dict[str, str]:
    out = {}
    for part in filter(None, text.split(",")):
        key, sep, val = part.partition("=")
        if not sep:
            raise InputError(f"expected key=value, got {part!r}")
        out[key.strip()] = val.strip()
    return out


def _time(text: str) -> int:
    try:
        return parse_time(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def build_circuit(source: str, delays: Optional[str] = None) -> Circuit:
    """``orloop:N``, ``srlatch``, ``adder:N``, ``buffer``, ``tree`` or a netlist path."""
    name, _, arg = source.partition(":")
    if name == "orloop":
        c = build_or_loop(int(arg or 30))
    elif name == "srlatch":
        c = build_sr_latch()
    elif name == "adder":
        c = build_adder(int(arg or 4))
    elif name == "buffer":
        c = build_buffer()
    elif name == "tree":
        c = build_clock_tree()
    else:
        path = Path(source)
        if not path.exists():
            raise InputError(f"no such netlist file or builtin circuit: {source}")
        c = parse_netlist(path.read_text())
    if delays is not None:
        c = bind_delays(c, parse_delays(Path(delays).read_text()))
    missing = [g.name for g in c.gates if g.params is None]
    if missing:
        raise InputError(f"no delay annotation for instance {missing[0]} and no default entry")
    return c


def build_stimulus(source: Optional[str], circuit: Circuit,
                   seed: int = 0) -> Tuple[Circuit, Dict[str, List[Transition]]]:
    """Stimulus file, or a recipe: ``pulse:SIG:width=..,start=..``,
    ``adder-up:width=..``, ``adder-down:width=..``,
    ``random:SIG:count=..,min=..,max=..`` (uses the seed)."""
    if source is None:
        return circuit, {}
    head, _, rest = source.partition(":")
    if head == "pulse":
        sig, _, opts = rest.partition(":")
        kv = _kv(opts)
        if "width" not in kv:
            raise InputError("pulse recipe needs width=")
        init = circuit.init.get(sig, LO)
        return circuit, pulse(sig, _time(kv.get("start", "10ps")), _time(kv["width"]), init)
    if head in ("adder-up", "adder-down"):
        kv = _kv(rest)
        if "width" not in kv:
            raise InputError(f"{head} recipe needs width=")
        n = sum(1 for s in circuit.inputs if s.startswith("A"))
        direction = head.split("-")[1]
        a = 0 if direction == "up" else 1
        c = with_settled_inputs(circuit, adder_operands(n, a, (1 << n) - 1))
        return c, ex.adder_stimulus(direction, _time(kv["width"]), _time(kv.get("start", "10ps")))
    if head == "random":
        sig, _, opts = rest.partition(":")
        kv = _kv(opts)
        rng = random.Random(seed)
        lo, hi = _time(kv.get("min", "1ps")), _time(kv.get("max", "20ps"))
        t = _time(kv.get("start", "10ps"))
        level = circuit.init.get(sig, LO)
        edges = []
        for _ in range(int(kv.get("count", "100"))):
            level = ~level
            edges.append(Transition(t, level))
            t += rng.randint(lo, hi)
        return circuit, {sig: edges}
    path = Path(source)
    if not path.exists():
        raise InputError(f"no such stimulus file or recipe: {source}")
    return circuit, parse_stimulus(path.read_text(), circuit)


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text)


# --- commands -----------------------------------------------------------------

def cmd_sim(args) -> int:
    spec = RunSpec(args.circuit, args.stim, args.delays, Model.parse(args.model),
                   _time(args.t_end), args.max_events, args.vcd, args.csv, args.timescale,
                   args.seed, not args.outputs_only, args.fast)
    circuit = build_circuit(spec.circuit, spec.delays)
    circuit, stim = build_stimulus(spec.stimulus, circuit, spec.seed)
    sim = fast_simulate if spec.fast else simulate
    res = sim(circuit, stim, spec.config())
    _write(spec.vcd, write_vcd(res.trace, spec.timescale))
    _write(spec.csv, write_trace_csv(res.trace))
    print(f"status={res.status.value} committed={res.committed} cancelled={res.cancelled} "
          f"scheduled={res.scheduled} pending={res.pending} end_as={res.end_time}")
    for s in circuit.outputs:
        if s in res.trace.signals:
            print(f"{s}: {res.trace.count(s)} transitions, final {int(res.trace.final_level(s))}")
    return 0


def cmd_sweep(args) -> int:
    model = Model.parse(args.model)
    lo, hi, step = _time(args.start), _time(args.stop), _time(args.step)
    if step <= 0 or hi < lo:
        raise InputError("need start <= stop and a positive step")
    widths = list(range(lo, hi + 1, step))
    delays = args.delays
    points = run_sweep(lambda: build_circuit(args.circuit, delays), widths,
                       SimConfig(model, _time(args.t_end)), args.input, args.output)
    text = write_sweep_csv(points)
    _write(args.csv, text)
    if not args.csv:
        sys.stdout.write(text)
    return 0


def cmd_bisect(args) -> int:
    circuit = build_circuit(args.circuit, args.delays)
    config = SimConfig(Model.parse(args.model), _time(args.t_end), args.max_events)
    flat = FlatCircuit(circuit)
    run = lambda w: fast_simulate(circuit, pulse(args.input, _time(args.start), w), config, flat=flat)
    pred = settles_flipped if args.predicate == "settles" else propagates
    b = find_critical_width(run, args.signal, _time(args.lo), _time(args.hi), _time(args.resolution),
                            pred)
    print(f"bracket_as={b.low},{b.high} probes={len(b.probes)}")
    for label, w in (("low", b.low), ("high", b.high)):
        tr = train_of(run(w), args.signal)
        gate = circuit.driver(args.signal)
        v = classify(tr, gate.params) if gate else None
        print(f"{label}: periods={len(tr)} transitions={tr.transitions} "
              f"verdict={v.kind.value if v else 'n/a'} suspect={v.metastability_suspect if v else 'n/a'}")
        if label == "high":
            _write(args.train_csv, write_train_csv(tr))
    return 0


def cmd_srlatch(args) -> int:
    models = [Model.IDM_EXP, Model.INERTIAL] if args.model == "both" else [Model.parse(args.model)]
    set_width = _time(args.set_width) if args.set_width else None
    reset_rise = _time(args.reset_rise) if args.reset_rise else None
    for m in models:
        r = ex.latch_recipe(m, set_width, _time(args.reset_width), reset_rise=reset_rise)
        set_width, reset_rise = r.set_width, r.reset_rise
        runs = {"set-only": r.set_only, "set-plus-reset": r.set_reset}
        chosen = runs if args.variant == "both" else {args.variant: runs[args.variant]}
        for name, run in chosen.items():
            print(f"{m.value} {name}: set_width_as={r.set_width} reset_rise_as={r.reset_rise} "
                  f"T_periods={run.periods} T={run.verdict_t.kind.value} U={run.verdict_u.kind.value} "
                  f"suspect={run.verdict_t.metastability_suspect} Q_transitions={run.q_transitions} "
                  f"QN_transitions={run.qn_transitions}")
            if args.csv:
                _write(f"{args.csv}.{m.value}.{name}.csv", write_trace_csv(run.result.trace))
    return 0


def cmd_adder(args) -> int:
    model = Model.parse(args.model)
    circuit = ex.adder_circuit(args.direction, args.bits)
    res = simulate(circuit, ex.adder_stimulus(args.direction, _time(args.width)),
                   SimConfig(model, _time(args.t_end)))
    sig = ex.adder_signals(args.bits)
    prof = degradation_profile(res.trace, sig)
    bad = check_causal_order(res.trace, sig)
    print("propagated=" + ",".join(s for s in sig if res.trace.count(s)))
    print("causal_order=" + ("ok" if bad is None else f"violated:{bad[0]}>{bad[1]}"))
    for s in sig:
        print(f"{s}: first_width_as={prof[s] if prof[s] is not None else 'NONE'}")
    _write(args.csv, write_profile_csv(prof))
    return 0


def cmd_bench(args) -> int:
    try:
        mults = tuple(int(x) for x in args.multipliers.split(","))
    except ValueError:
        raise InputError(f"bad multiplier list {args.multipliers!r}") from None
    spec = benchmod.BenchSpec(args.circuit, mults, args.transitions, args.repetitions)
    rows = benchmod.run_bench(spec, progress=lambda s: log.info(s))
    header, table = benchmod.bench_table(rows)
    text = write_rows_csv(header, table)
    _write(args.csv, text)
    sys.stdout.write(text)
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idmsim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, circuit_default=None):
        sp.add_argument("--circuit", default=circuit_default, required=circuit_default is None,
                        help="netlist file or builtin: orloop:N, srlatch, adder:N, buffer, tree")
        sp.add_argument("--delays", help="delay annotation file")
        sp.add_argument("--model", default="idm", help="pure, inertial or idm")
        sp.add_argument("--t-end", default="1000000ps")
        sp.add_argument("--max-events", type=int, default=10**7)

    sp = sub.add_parser("sim", help="simulate one circuit")
    common(sp)
    sp.add_argument("--stim", help="stimulus file or recipe (pulse:, adder-up:, adder-down:, random:)")
    sp.add_argument("--vcd")
    sp.add_argument("--csv")
    sp.add_argument("--timescale", default="1fs", choices=["1fs", "1ps"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--outputs-only", action="store_true", help="record primary outputs only")
    sp.add_argument("--fast", action="store_true", help="use the compiled kernel")
    sp.set_defaults(func=cmd_sim)

    sp = sub.add_parser("sweep", help="output versus input pulse width")
    common(sp, "buffer")
    sp.add_argument("--start", default="0.1ps")
    sp.add_argument("--stop", default="10ps")
    sp.add_argument("--step", default="0.1ps")
    sp.add_argument("--input", default="I")
    sp.add_argument("--output", default="O")
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bisect", help="critical input pulse width")
    common(sp, "orloop:30")
    sp.add_argument("--signal", default="A")
    sp.add_argument("--input", default="I")
    sp.add_argument("--start", default="10ps")
    sp.add_argument("--lo", default="50ps")
    sp.add_argument("--hi", default="150ps")
    sp.add_argument("--resolution", default="1")
    sp.add_argument("--predicate", choices=["settles", "propagates"], default="settles")
    sp.add_argument("--train-csv")
    sp.set_defaults(func=cmd_bisect, t_end="20000ps")

    sp = sub.add_parser("srlatch", help="set-only versus set-plus-reset recipe")
    sp.add_argument("--variant", choices=["set-only", "set-plus-reset", "both"], default="both")
    sp.add_argument("--model", default="both", help="idm, inertial or both")
    sp.add_argument("--set-width")
    sp.add_argument("--reset-width", default="12ps")
    sp.add_argument("--reset-rise")
    sp.add_argument("--csv", help="prefix for per-run trace CSVs")
    sp.set_defaults(func=cmd_srlatch)

    sp = sub.add_parser("adder", help="pulse on A0 of the ripple-carry adder")
    sp.add_argument("--direction", choices=["up", "down"], default="up")
    sp.add_argument("--width", required=True)
    sp.add_argument("--bits", type=int, default=4)
    sp.add_argument("--model", default="idm")
    sp.add_argument("--t-end", default="5000ps")
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_adder)

    sp = sub.add_parser("bench", help="runtime overhead of idm over inertial")
    sp.add_argument("--circuit", default="tree", choices=sorted(benchmod.UNITS))
    sp.add_argument("--multipliers", default="1,2,4,10,20,40")
    sp.add_argument("--transitions", type=int, default=200_000)
    sp.add_argument("--repetitions", type=int, default=30)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except INTERNAL_ERRORS as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
