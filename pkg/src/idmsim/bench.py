"""Runtime overhead of the involution channel over inertial delays.

Each multiplier instantiates the chosen circuit that many times with no
shared nets and splits a fixed budget of input transitions evenly across the
copies.  Pulses are long compared with every path delay, so neither model
cancels anything and both commit the same number of transitions; that
equality is checked before any timing is reported.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

from .core import PS, Level, Model, Transition
from .engine import SimConfig
from .fastsim import FlatCircuit, fast_simulate, flatten_stimulus
from .netlist import (Circuit, adder_operands, build_adder, build_buffer, build_clock_tree,
                      replicate, with_settled_inputs)

DEFAULT_MULTIPLIERS = (1, 2, 4, 10, 20, 40)


class BenchMismatch(RuntimeError):
    """The compared models did not commit the same transitions."""


def _adder_unit() -> Tuple[Circuit, str]:
    # B = 1111 so every toggle of A0 ripples through all carries
    c = with_settled_inputs(build_adder(4), adder_operands(4, 0, 0b1111))
    return c, "A0"


def _tree_unit() -> Tuple[Circuit, str]:
    return build_clock_tree(), "CLK"


def _buffer_unit() -> Tuple[Circuit, str]:
    return build_buffer(), "I"


UNITS: Dict[str, Callable[[], Tuple[Circuit, str]]] = {
    "adder": _adder_unit,
    "tree": _tree_unit,
    "buffer": _buffer_unit,
}


@dataclass
class BenchSpec:
    circuit: str = "tree"
    multipliers: Sequence[int] = DEFAULT_MULTIPLIERS
    transitions: int = 200_000
    repetitions: int = 30
    models: Sequence[Model] = (Model.INERTIAL, Model.IDM_EXP)
    half_period: int = 200 * PS

    def __post_init__(self):
        if self.circuit not in UNITS:
            raise ValueError(f"unknown bench circuit {self.circuit!r}; choose from {sorted(UNITS)}")
        if not self.multipliers or min(self.multipliers) < 1:
            raise ValueError("multipliers must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.transitions < 1:
            raise ValueError("transitions must be >= 1")


@dataclass
class BenchRow:
    circuit: str
    multiplier: int
    model: Model
    mean: float
    stdev: float
    committed: int
    times: List[float] = field(repr=False, default_factory=list)


def bench_workload(spec: BenchSpec, multiplier: int):
    """Replicated circuit plus a stimulus toggling each copy's input."""
    unit, pin = UNITS[spec.circuit]()
    circuit = replicate(unit, multiplier)
    per_copy = spec.transitions // multiplier
    stim: Dict[str, List[Transition]] = {}
    for k in range(multiplier):
        sig = f"u{k}/{pin}"
        first = ~Level(circuit.init[sig])
        edges = []
        for n in range(per_copy):
            level = first if n % 2 == 0 else ~first
            edges.append(Transition(10 * PS + n * spec.half_period, level))
        stim[sig] = edges
    t_end = 10 * PS + per_copy * spec.half_period + 100 * spec.half_period
    return circuit, stim, t_end


def run_bench(spec: BenchSpec, progress: Callable[[str], None] = lambda s: None) -> List[BenchRow]:
    """Time every model ``repetitions`` times per multiplier, sequentially.

    Models alternate within each repetition so slow drifts of the machine hit
    all of them alike.
    """
    rows: List[BenchRow] = []
    for mult in spec.multipliers:
        circuit, stim, t_end = bench_workload(spec, mult)
        flat = FlatCircuit(circuit)
        prepared = flatten_stimulus(flat, stim)
        configs = {m: SimConfig(m, t_end=t_end, max_events=2**62, record_internal=False)
                   for m in spec.models}
        committed: Dict[Model, int] = {}
        for m, cfg in configs.items():
            # warm-up: compiles the kernel and records the transition count
            res = fast_simulate(circuit, stim, cfg, flat=flat, prepared=prepared, record=False)
            if res.capped or res.pending:
                raise BenchMismatch(f"{m.value} run did not finish within the horizon")
            committed[m] = res.committed
            if res.cancelled:
                raise BenchMismatch(f"{m.value} cancelled {res.cancelled} events; pulses too short")
        if len(set(committed.values())) != 1:
            raise BenchMismatch(f"committed transitions differ across models: {committed}")
        times: Dict[Model, List[float]] = {m: [] for m in configs}
        for rep in range(spec.repetitions):
            for m, cfg in configs.items():
                t0 = time.perf_counter()
                fast_simulate(circuit, stim, cfg, flat=flat, prepared=prepared, check=False,
                              record=False)
                times[m].append(time.perf_counter() - t0)
            progress(f"{spec.circuit} x{mult}: repetition {rep + 1}/{spec.repetitions}")
        for m in configs:
            ts = times[m]
            sd = statistics.stdev(ts) if len(ts) > 1 else 0.0
            rows.append(BenchRow(spec.circuit, mult, m, statistics.fmean(ts), sd, committed[m], ts))
    return rows


def overhead(rows: Sequence[BenchRow], multiplier: int, circuit: str = None,
             base: Model = Model.INERTIAL, other: Model = Model.IDM_EXP) -> float:
    """Percentage by which ``other`` is slower than ``base`` on average."""
    pick = {r.model: r for r in rows
            if r.multiplier == multiplier and (circuit is None or r.circuit == circuit)}
    return 100.0 * (pick[other].mean - pick[base].mean) / pick[base].mean


def bench_table(rows: Sequence[BenchRow]) -> Tuple[Tuple[str, ...], List[Tuple]]:
    """CSV-ready rows; overhead is filled in on the involution rows."""
    header = ("circuit", "multiplier", "model", "committed", "mean_s", "stdev_s", "overhead_pct")
    out = []
    for r in rows:
        ov = ""
        if r.model is Model.IDM_EXP and any(x.model is Model.INERTIAL and x.multiplier == r.multiplier
                                            and x.circuit == r.circuit for x in rows):
            ov = f"{overhead(rows, r.multiplier, r.circuit):.3f}"
        out.append((r.circuit, r.multiplier, r.model.value, r.committed,
                    f"{r.mean:.6f}", f"{r.stdev:.6f}", ov))
    return header, out
