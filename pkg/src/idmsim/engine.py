"""Deterministic discrete-event kernel.

Events are ordered by ``(time, seq)``.  Revoked events stay in the heap and are
skipped when popped (tombstoning by sequence number).  All events sharing a
timestamp are applied before any gate is re-evaluated, so simultaneous input
changes of one gate produce a single evaluation.
"""

from __future__ import annotations

import enum
import heapq
import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .channel import Channel, DecisionKind
from .core import (LO, PS, Level, Model, Trace, Transition,
                   checked_time, validate_signal)
from .netlist import Circuit, GateKind

log = logging.getLogger(__name__)

Stimulus = Mapping[str, Sequence[Transition]]


class SimulationError(RuntimeError):
    pass


class StimulusError(ValueError):
    pass


class Status(enum.Enum):
    COMPLETED = "completed"
    EVENT_CAP_REACHED = "event_cap_reached"


@dataclass
class SimConfig:
    model: Model = Model.IDM_EXP
    t_end: int = 10**6 * PS
    max_events: int = 10**7
    record_internal: bool = True

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.max_events <= 0:
            raise ValueError("max_events must be positive")
        checked_time(self.t_end)


@dataclass
class SimResult:
    trace: Trace
    status: Status
    committed: int
    cancelled: int
    scheduled: int
    pending: int
    end_time: int

    @property
    def capped(self) -> bool:
        return self.status is Status.EVENT_CAP_REACHED


_FN = {
    GateKind.BUF: lambda a, b: a,
    GateKind.INV: lambda a, b: 1 - a,
    GateKind.AND2: lambda a, b: a & b,
    GateKind.OR2: lambda a, b: a | b,
    GateKind.NAND2: lambda a, b: 1 - (a & b),
    GateKind.NOR2: lambda a, b: 1 - (a | b),
    GateKind.XOR2: lambda a, b: a ^ b,
}


def check_stimulus(circuit: Circuit, stimulus: Stimulus) -> None:
    for sig, edges in stimulus.items():
        if sig not in circuit.inputs:
            raise StimulusError(f"stimulus drives {sig!r}, which is not a primary input")
        bad = validate_signal(circuit.init[sig], edges)
        if bad is not None:
            raise StimulusError(f"stimulus on {sig}: edge {bad[0]}: {bad[1]}")
        if edges and edges[0].time < 0:
            raise StimulusError(f"stimulus on {sig} starts before t=0")


def simulate(circuit: Circuit, stimulus: Stimulus, config: SimConfig) -> SimResult:
    check_stimulus(circuit, stimulus)
    names = circuit.signals()
    index = {s: i for i, s in enumerate(names)}
    level = [int(circuit.init[s]) for s in names]

    gates = circuit.gates
    n = len(gates)
    fanout: List[List[int]] = [[] for _ in names]
    g_in_a = [0] * n
    g_in_b = [0] * n
    g_fn = []
    g_out = [0] * n
    fn_val = [0] * n
    channels: List[Channel] = []
    for gi, g in enumerate(gates):
        if g.params is None:
            raise SimulationError(f"gate {g.name} has no delay parameters")
        ins = [index[s] for s in g.inputs]
        for s in set(ins):
            fanout[s].append(gi)
        g_in_a[gi] = ins[0]
        g_in_b[gi] = ins[-1]
        g_fn.append(_FN[g.kind])
        g_out[gi] = index[g.output]
        fn_val[gi] = level[g_out[gi]]
        channels.append(Channel(g.params, Level(level[g_out[gi]]), config.model))

    recorded = set(names) if config.record_internal else set(circuit.outputs)
    trace = Trace()
    for s in names:
        if s in recorded:
            trace.add_signal(s, Level(level[index[s]]))
    rec: List[Optional[List[Transition]]] = [trace.signals[s] if s in recorded else None for s in names]

    # heap entries: (time, seq, gate index or -1 - signal index, level)
    heap: List[Tuple[int, int, int, int]] = []
    seq = 0
    for sig in sorted(stimulus):
        si = index[sig]
        for t, lv in stimulus[sig]:
            heap.append((t, seq, -1 - si, int(lv)))
            seq += 1
    heapq.heapify(heap)
    pending_seq: List[deque] = [deque() for _ in range(n)]
    dead = set()

    committed = cancelled = scheduled = processed = 0
    status = Status.COMPLETED
    t_end = config.t_end
    max_events = config.max_events
    dirty = set(range(n))
    t = 0
    heappop, heappush = heapq.heappop, heapq.heappush
    SCHEDULE = DecisionKind.SCHEDULE

    while True:
        while heap and heap[0][0] == t:
            _, sq, target, lv = heappop(heap)
            if sq in dead:
                dead.discard(sq)
                continue
            if target >= 0:
                channels[target].commit(t)
                pending_seq[target].popleft()
                committed += 1
                si = g_out[target]
            else:
                si = -1 - target
            processed += 1
            if level[si] == lv:
                raise SimulationError(f"non-alternating commit on {names[si]} at {t}")
            level[si] = lv
            r = rec[si]
            if r is not None:
                r.append(Transition(t, Level(lv)))
            dirty.update(fanout[si])

        for gi in sorted(dirty):
            v = g_fn[gi](level[g_in_a[gi]], level[g_in_b[gi]])
            if v == fn_val[gi]:
                continue
            fn_val[gi] = v
            dec = channels[gi].on_input_edge(t, v == 1)
            if dec.kind is SCHEDULE:
                if dec.time <= t:
                    raise SimulationError(
                        f"gate {gates[gi].name} scheduled a zero-delay output at {t}")
                checked_time(dec.time)
                heappush(heap, (dec.time, seq, gi, int(dec.level)))
                pending_seq[gi].append(seq)
                seq += 1
                scheduled += 1
            else:
                dead.add(pending_seq[gi].pop())
                cancelled += 1
        dirty.clear()

        if processed >= max_events:
            status = Status.EVENT_CAP_REACHED
            break
        if not heap:
            break
        # skip tombstones so an all-dead queue does not advance time
        while heap and heap[0][1] in dead:
            dead.discard(heappop(heap)[1])
        if not heap or heap[0][0] > t_end:
            break
        t = heap[0][0]

    pending = sum(len(q) for q in pending_seq)
    return SimResult(trace, status, committed, cancelled, scheduled, pending, t)


def pulse(signal: str, start: int, width: int, initial: Level = LO) -> Dict[str, List[Transition]]:
    """Stimulus with one pulse of ``width`` on ``signal`` starting at ``start``."""
    return {signal: [Transition(start, ~Level(initial)), Transition(start + width, Level(initial))]}


@dataclass
class SweepPoint:
    delta_i: int
    delta_o: Optional[int]

    @property
    def cancelled(self) -> bool:
        return self.delta_o is None


def run_sweep(make_circuit: Callable[[], Circuit], widths: Sequence[int], config: SimConfig,
              input_signal: str = "I", output_signal: str = "O", start: int = 10 * PS,
              initial: Level = LO) -> List[SweepPoint]:
    """Simulate one input pulse per width and report the first output pulse."""
    prev = None
    for w in widths:
        if w <= 0 or (prev is not None and w <= prev):
            raise ValueError("widths must be positive and increasing")
        prev = w
    circuit = make_circuit()
    out = []
    for w in widths:
        res = simulate(circuit, pulse(input_signal, start, w, initial), config)
        edges = res.trace.transitions(output_signal)
        out.append(SweepPoint(w, edges[1].time - edges[0].time if len(edges) >= 2 else None))
    return out
