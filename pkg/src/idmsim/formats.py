"""Text formats: netlists, delay annotations, stimuli, VCD and CSV.

Netlist::

    # comment
    input I
    output O
    init A 1
    gate or2 G1 A I FB

Delays (attoseconds)::

    G1 4600000 5800000 vth=0.5 dp=1000000
    default 4000000 4000000

Stimulus (attoseconds)::

    1000000 I 1
    3000000 I 0

Every parse error carries the 1-based line number in ``.line`` and in its
message.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .core import PS, ChannelParams, InvariantViolation, Level, Trace, Transition
from .netlist import ArityMismatch, Circuit, Gate, GateKind, MultipleDrivers, NetlistError

log = logging.getLogger(__name__)


class ParseError(ValueError):
    line: Optional[int] = None


class FormatSyntaxError(ParseError):
    pass


class UnknownGateKind(ParseError):
    pass


class UnknownInstance(ParseError):
    pass


class MissingDelay(ParseError):
    pass


class NonMonotonicStimulus(ParseError):
    pass


class NonAlternating(ParseError):
    pass


class UnknownInput(ParseError):
    pass


def _fail(cls, line: Optional[int], msg: str):
    err = cls(f"line {line}: {msg}" if line is not None else msg)
    err.line = line
    return err


def _lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].split()
        if body:
            yield no, body


def _int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise _fail(FormatSyntaxError, line, f"{what} must be an integer, got {tok!r}") from None


def _level(tok: str, line: int) -> Level:
    if tok not in ("0", "1"):
        raise _fail(FormatSyntaxError, line, f"level must be 0 or 1, got {tok!r}")
    return Level(int(tok))


# --- netlist ------------------------------------------------------------------

def parse_netlist(text: str) -> Circuit:
    """Build a circuit.  Signals read but never driven nor declared become
    implicit primary inputs held at their initial level."""
    inputs: List[str] = []
    outputs: List[str] = []
    init: Dict[str, Level] = {}
    gates: List[Gate] = []
    driven: Dict[str, int] = {}
    names: Dict[str, int] = {}
    for no, tok in _lines(text):
        head = tok[0]
        if head in ("input", "output"):
            if len(tok) != 2:
                raise _fail(FormatSyntaxError, no, f"expected '{head} <signal>'")
            if head == "input":
                if tok[1] in driven:
                    raise _fail(MultipleDrivers, no, f"input {tok[1]} is already driven")
                if tok[1] not in inputs:
                    inputs.append(tok[1])
            elif tok[1] not in outputs:
                outputs.append(tok[1])
        elif head == "init":
            if len(tok) != 3:
                raise _fail(FormatSyntaxError, no, "expected 'init <signal> <0|1>'")
            init[tok[1]] = _level(tok[2], no)
        elif head == "gate":
            if len(tok) < 5:
                raise _fail(FormatSyntaxError, no, "expected 'gate <kind> <name> <out> <in1> [<in2>]'")
            try:
                kind = GateKind(tok[1].lower())
            except ValueError:
                raise _fail(UnknownGateKind, no, f"unknown gate kind {tok[1]!r}") from None
            name, out, ins = tok[2], tok[3], tuple(tok[4:])
            if len(ins) != kind.arity:
                raise _fail(ArityMismatch, no,
                            f"{kind.value} takes {kind.arity} inputs, got {len(ins)}")
            if out in driven:
                raise _fail(MultipleDrivers, no, f"signal {out} already driven (line {driven[out]})")
            if out in inputs:
                raise _fail(MultipleDrivers, no, f"signal {out} is a primary input")
            if name in names:
                raise _fail(FormatSyntaxError, no, f"duplicate instance name {name} (line {names[name]})")
            driven[out] = no
            names[name] = no
            gates.append(Gate(name, kind, ins, out))
        else:
            raise _fail(FormatSyntaxError, no, f"unknown statement {head!r}")
    for g in gates:
        for s in g.inputs:
            if s not in driven and s not in inputs:
                inputs.append(s)
    for s in outputs:
        if s not in driven and s not in inputs:
            raise _fail(NetlistError, None, f"primary output {s} is undriven")
    return Circuit(gates, inputs, outputs, init)


# --- delays -------------------------------------------------------------------

@dataclass
class DelayTable:
    entries: Dict[str, ChannelParams] = field(default_factory=dict)
    default: Optional[ChannelParams] = None
    lines: Dict[str, int] = field(default_factory=dict)


def parse_delays(text: str) -> DelayTable:
    table = DelayTable()
    for no, tok in _lines(text):
        if len(tok) < 3:
            raise _fail(FormatSyntaxError, no, "expected '<instance> <up_as> <down_as> [vth=..] [dp=..]'")
        name = tok[0]
        up = _int(tok[1], no, "rising delay")
        down = _int(tok[2], no, "falling delay")
        vth, dp = 0.5, 1 * PS
        for opt in tok[3:]:
            key, sep, val = opt.partition("=")
            if not sep:
                raise _fail(FormatSyntaxError, no, f"bad option {opt!r}")
            if key == "vth":
                try:
                    vth = float(val)
                except ValueError:
                    raise _fail(FormatSyntaxError, no, f"bad vth {val!r}") from None
            elif key == "dp":
                dp = _int(val, no, "pure delay")
            else:
                raise _fail(FormatSyntaxError, no, f"unknown option {key!r}")
        try:
            params = ChannelParams(up, down, dp, vth)
        except InvariantViolation as exc:
            raise _fail(InvariantViolation, no, str(exc)) from None
        if name in table.lines:
            raise _fail(FormatSyntaxError, no, f"{name} already annotated on line {table.lines[name]}")
        table.lines[name] = no
        if name == "default":
            table.default = params
        else:
            table.entries[name] = params
    return table


def bind_delays(circuit: Circuit, table: DelayTable) -> Circuit:
    """Attach annotated parameters to every gate of ``circuit``."""
    gate_names = {g.name for g in circuit.gates}
    for name in table.entries:
        if name not in gate_names:
            raise _fail(UnknownInstance, table.lines[name], f"no gate instance named {name}")
    params = {}
    for g in circuit.gates:
        p = table.entries.get(g.name, table.default)
        if p is None:
            p = g.params
        if p is None:
            raise MissingDelay(f"gate {g.name} has no delay annotation and there is no default")
        params[g.name] = p
    return circuit.with_params(params)


# --- stimulus -----------------------------------------------------------------

def parse_stimulus(text: str, circuit: Circuit) -> Dict[str, List[Transition]]:
    out: Dict[str, List[Transition]] = {}
    for no, tok in _lines(text):
        if len(tok) != 3:
            raise _fail(FormatSyntaxError, no, "expected '<time_as> <signal> <0|1>'")
        t = _int(tok[0], no, "time")
        if t < 0:
            raise _fail(FormatSyntaxError, no, "stimulus times must be non-negative")
        sig = tok[1]
        level = _level(tok[2], no)
        if sig not in circuit.inputs:
            raise _fail(UnknownInput, no, f"{sig} is not a primary input")
        edges = out.setdefault(sig, [])
        prev_level = edges[-1].level if edges else circuit.init[sig]
        if edges and t <= edges[-1].time:
            raise _fail(NonMonotonicStimulus, no, f"time {t} not after {edges[-1].time} on {sig}")
        if level == prev_level:
            raise _fail(NonAlternating, no, f"{sig} is already {int(level)}")
        edges.append(Transition(t, level))
    return out


def write_stimulus(stimulus: Dict[str, Sequence[Transition]]) -> str:
    rows = sorted((t, sig, int(lv)) for sig, edges in stimulus.items() for t, lv in edges)
    return "".join(f"{t} {sig} {lv}\n" for t, sig, lv in rows)


# --- VCD ----------------------------------------------------------------------

_TIMESCALES = {"1fs": 1000, "1ps": PS}


def _vcd_id(k: int) -> str:
    chars = []
    k += 1
    while k:
        k, r = divmod(k - 1, 94)
        chars.append(chr(33 + r))
    return "".join(chars)


def _to_tick(t: int, unit: int) -> int:
    # integer rounding, ties away from zero
    q, r = divmod(abs(t), unit)
    q += 2 * r >= unit
    return q if t >= 0 else -q


def write_vcd(trace: Trace, timescale: str = "1fs", warnings: Optional[List[str]] = None,
              module: str = "top") -> str:
    """Render ``trace`` as a two-state VCD document.

    Times are rounded to the timescale.  When rounding would put an edge on
    or before the previous edge of the same signal, it is moved to the next
    free tick and a warning is recorded (and logged).
    """
    key = timescale.replace(" ", "")
    if key not in _TIMESCALES:
        raise ValueError(f"timescale must be one of {sorted(_TIMESCALES)}")
    unit = _TIMESCALES[key]
    names = list(trace.signals)
    ids = {s: _vcd_id(i) for i, s in enumerate(names)}

    changes: List[Tuple[int, int, str, int]] = []
    order = 0
    for s in names:
        last = None
        for t, lv in trace.signals[s]:
            tick = _to_tick(t, unit)
            if last is not None and tick <= last:
                msg = f"{s}: edge at {t} as nudged from tick {tick} to {last + 1}"
                log.warning(msg)
                if warnings is not None:
                    warnings.append(msg)
                tick = last + 1
            last = tick
            changes.append((tick, order, s, int(lv)))
            order += 1
    changes.sort()

    buf = io.StringIO()
    buf.write("$version idmsim $end\n")
    buf.write(f"$timescale {key} $end\n")
    buf.write(f"$scope module {module} $end\n")
    for s in names:
        buf.write(f"$var wire 1 {ids[s]} {s} $end\n")
    buf.write("$upscope $end\n$enddefinitions $end\n")
    buf.write("#0\n$dumpvars\n")
    for s in names:
        buf.write(f"{int(trace.initial[s])}{ids[s]}\n")
    buf.write("$end\n")
    current = 0
    for tick, _, s, lv in changes:
        if tick != current:
            buf.write(f"#{tick}\n")
            current = tick
        buf.write(f"{lv}{ids[s]}\n")
    return buf.getvalue()


# --- CSV ----------------------------------------------------------------------

def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_trace_csv(trace: Trace) -> str:
    """Rows ``signal,time_as,level``; initial levels use ``init`` as time."""
    rows: List[Tuple] = [(s, "init", int(trace.initial[s])) for s in trace.signals]
    for s, edges in trace.signals.items():
        rows.extend((s, t, int(lv)) for t, lv in edges)
    return _csv(("signal", "time_as", "level"), rows)


def read_trace_csv(text: str) -> Trace:
    trace = Trace()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["signal", "time_as", "level"]:
        raise _fail(FormatSyntaxError, 1, "bad trace CSV header")
    for no, row in enumerate(reader, 2):
        if len(row) != 3:
            raise _fail(FormatSyntaxError, no, "expected three columns")
        s, t, lv = row
        level = _level(lv, no)
        if t == "init":
            trace.add_signal(s, level)
        else:
            if s not in trace.signals:
                raise _fail(FormatSyntaxError, no, f"{s} has no init row")
            trace.signals[s].append(Transition(_int(t, no, "time"), level))
    return trace


def write_sweep_csv(points) -> str:
    return _csv(("delta_i_as", "delta_o_as"),
                ((p.delta_i, "CANCELLED" if p.delta_o is None else p.delta_o) for p in points))


def write_train_csv(train) -> str:
    return _csv(("n", "hi_as", "lo_as"),
                ((n, hi, "" if lo is None else lo) for n, (hi, lo) in enumerate(train.entries, 1)))


def write_profile_csv(profile: Dict[str, Optional[int]]) -> str:
    return _csv(("signal", "first_width_as"),
                ((s, "NONE" if w is None else w) for s, w in profile.items()))


def write_rows_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return _csv(header, rows)
