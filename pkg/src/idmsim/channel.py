"""Single-input single-output delay channels.

Three models are provided: pure delay, HDL-style inertial delay, and the
involution exp-channel.  The exp-channel is realised twice: once through its
closed-form delay functions (used by the simulator) and once by integrating
the switched exponential waveforms directly (:func:`analog_oracle`).  The two
share nothing but the parameter derivation, so agreement between them is a
meaningful check.

All channel arithmetic runs in floating-point attoseconds; only the final
output time is rounded to an integer.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, List, NamedTuple, Optional, Sequence, Tuple

from .core import HI, LO, ChannelParams, Level, Model, Transition, round_as

NEG_INF = float("-inf")


@dataclass(frozen=True)
class ExpChannelDerived:
    tau_up: float
    tau_down: float
    delta_c_up: int
    delta_c_down: int


def derive(params: ChannelParams) -> ExpChannelDerived:
    """Time constants that make each normalised step response hit ``vth``
    exactly ``delta_inf - delta_pure`` after the delayed input edge."""
    dc_up = params.delta_inf_up - params.delta_pure
    dc_down = params.delta_inf_down - params.delta_pure
    vth = params.vth
    tau_up = dc_up / math.log(1.0 / (1.0 - vth))
    tau_down = dc_down / math.log(1.0 / vth)
    return ExpChannelDerived(tau_up, tau_down, dc_up, dc_down)


def _log_ratio(x: float, k: float) -> float:
    # log(1 - k*(e^x - 1)); written with log1p/expm1 so that x = 0 gives 0 exactly
    if x > 700.0:
        return NEG_INF
    a = -k * math.expm1(x)
    if a <= -1.0:
        return NEG_INF
    return math.log1p(a)


def delta_up(d: ExpChannelDerived, vth: float, T: Optional[float]) -> float:
    """Rising delay (channel part) for a reference distance ``T``.

    ``T=None`` stands for an infinitely settled channel.  Returns ``-inf``
    when the logarithm leaves its domain.
    """
    if T is None:
        return float(d.delta_c_up)
    return d.tau_up * _log_ratio(-T / d.tau_down, vth / (1.0 - vth))


def delta_down(d: ExpChannelDerived, vth: float, T: Optional[float]) -> float:
    if T is None:
        return float(d.delta_c_down)
    return d.tau_down * _log_ratio(-T / d.tau_up, (1.0 - vth) / vth)


class DecisionKind(enum.Enum):
    SCHEDULE = "schedule"
    CANCEL_PENDING = "cancel"
    NO_CHANGE = "none"


class Decision(NamedTuple):
    kind: DecisionKind
    time: Optional[int] = None
    level: Optional[Level] = None


CANCEL = Decision(DecisionKind.CANCEL_PENDING)
NO_CHANGE = Decision(DecisionKind.NO_CHANGE)


class ChannelError(RuntimeError):
    """Raised when the caller breaks the edge protocol (an engine bug)."""


class Channel:
    """Mutable per-gate channel state.

    ``pending`` holds not-yet-committed output events in time order as
    ``(time, level, exact_time)``.  The inertial channel keeps at most one.
    The pure channel, and the involution channel whenever ``delta_pure`` lets
    an edge arrive before an earlier output has fired, can have several in
    flight.  ``ref_time`` is
    kept unrounded so that rounding errors do not feed back into later delays.
    """

    __slots__ = ("params", "model", "derived", "vth", "out_level", "in_level",
                 "ref_time", "pending", "last_edge_time")

    def __init__(self, params: ChannelParams, level: Level = LO,
                 model: Optional[Model] = None):
        self.params = params
        self.model = model or params.model
        self.derived = derive(params)
        self.vth = params.vth
        self.out_level = Level(level)
        self.in_level = Level(level)
        self.ref_time: Optional[float] = None
        self.pending: Deque[Tuple[int, Level, float]] = deque()
        self.last_edge_time: Optional[int] = None

    def projected_level(self) -> Level:
        return self.pending[-1][1] if self.pending else self.out_level

    def on_input_edge(self, t: int, rising: bool) -> Decision:
        if self.last_edge_time is not None and t <= self.last_edge_time:
            raise ChannelError(f"input edge at {t} not after previous edge at {self.last_edge_time}")
        if bool(self.in_level) == rising:
            raise ChannelError(f"non-alternating input edge at {t}")
        self.last_edge_time = t
        self.in_level = HI if rising else LO
        if self.model is Model.IDM_EXP:
            return self._idm(t, rising)
        if self.model is Model.INERTIAL:
            return self._inertial(t, rising)
        return self._pure(t, rising)

    def _schedule(self, to: int, exact: Optional[float] = None) -> Decision:
        level = ~self.projected_level()
        self.pending.append((to, level, float(to) if exact is None else exact))
        return Decision(DecisionKind.SCHEDULE, to, level)

    def _idm(self, t: int, rising: bool) -> Decision:
        tc = t + self.params.delta_pure
        T = None if self.ref_time is None else tc - self.ref_time
        if rising:
            d = delta_up(self.derived, self.vth, T)
        else:
            d = delta_down(self.derived, self.vth, T)
        if d == NEG_INF:
            if not self.pending:
                raise ChannelError("log-domain underflow without a pending event")
            self.pending.pop()
            self.ref_time = None
            return CANCEL
        exact = tc + d
        to = tc + round_as(d)
        # a sub-attosecond pulse that rounds onto the pending tick is dropped too
        if self.pending and (exact <= self.pending[-1][2] or to <= self.pending[-1][0]):
            self.pending.pop()
            self.ref_time = exact
            return CANCEL
        self.ref_time = exact
        if to <= t:
            # only with delta_pure = 0: the edge meets its own output's commit
            # instant at the equilibrium, which has already fired
            to = t + 1
        return self._schedule(to, exact)

    def _inertial(self, t: int, rising: bool) -> Decision:
        d = self.params.delta_inf_up if rising else self.params.delta_inf_down
        to = t + d
        if self.pending:
            tp = self.pending[-1][0]
            # rejection window (to - d, to]; later pending events are out of order
            if tp > to - d:
                self.pending.pop()
                return CANCEL
        return self._schedule(to)

    def _pure(self, t: int, rising: bool) -> Decision:
        to = t + (self.params.delta_inf_up if rising else self.params.delta_inf_down)
        if self.pending and to <= self.pending[-1][0]:
            self.pending.pop()
            return CANCEL
        return self._schedule(to)

    def commit(self, t: int) -> Level:
        """Commit the earliest pending event, which must be due at ``t``."""
        if not self.pending or self.pending[0][0] != t:
            raise ChannelError(f"commit at {t} does not match pending {list(self.pending)}")
        level = self.pending.popleft()[1]
        self.out_level = level
        return level


def run_channel(params: ChannelParams, initial: Level, edges: Sequence[Transition],
                model: Optional[Model] = None) -> List[Transition]:
    """Feed a standalone channel an input waveform and return its output edges.

    Commits are interleaved with input edges in time order; a commit due at the
    same instant as an input edge happens first, matching the engine.
    """
    ch = Channel(params, initial, model)
    out: List[Transition] = []

    def flush(upto: int) -> None:
        while ch.pending and ch.pending[0][0] <= upto:
            t0 = ch.pending[0][0]
            out.append(Transition(t0, ch.commit(t0)))

    for t, level in edges:
        flush(t)
        ch.on_input_edge(t, level == HI)
    flush(2**63 - 1)
    return out


# --- waveform-switching reference -------------------------------------------

class Segment(NamedTuple):
    start: float
    value: float
    rising: bool


def _segment_value(seg: Segment, d: ExpChannelDerived, t: float) -> float:
    dt = t - seg.start
    if seg.rising:
        return 1.0 - (1.0 - seg.value) * math.exp(-dt / d.tau_up)
    return seg.value * math.exp(-dt / d.tau_down)


def analog_segments(params: ChannelParams, initial: Level,
                    edges: Sequence[Transition]) -> List[Segment]:
    """Piecewise-exponential trajectory after the pure-delay stage.

    The first segment starts at ``-inf`` on the settled rail.
    """
    d = derive(params)
    segs = [Segment(NEG_INF, float(initial), initial == HI)]
    for t, level in edges:
        s = float(t + params.delta_pure)
        prev = segs[-1]
        v = prev.value if prev.start == NEG_INF else _segment_value(prev, d, s)
        segs.append(Segment(s, v, level == HI))
    return segs


def analog_value_at(params: ChannelParams, initial: Level,
                    edges: Sequence[Transition], t: float) -> float:
    """Internal analog value (fraction of supply) at time ``t``."""
    segs = analog_segments(params, initial, edges)
    d = derive(params)
    current = segs[0]
    for seg in segs[1:]:
        if seg.start > t:
            break
        current = seg
    if current.start == NEG_INF:
        return current.value
    return _segment_value(current, d, t)


def analog_oracle_float(params: ChannelParams, initial: Level,
                        edges: Sequence[Transition]) -> List[Tuple[float, Level]]:
    """Threshold crossings of the switched-waveform trajectory, unrounded."""
    d = derive(params)
    vth = params.vth
    segs = analog_segments(params, initial, edges)
    out: List[Tuple[float, Level]] = []
    level = Level(initial)
    for i, seg in enumerate(segs):
        if seg.start == NEG_INF:
            continue
        end = segs[i + 1].start if i + 1 < len(segs) else math.inf
        if seg.rising and level == LO and seg.value < vth:
            tx = seg.start + d.tau_up * math.log((1.0 - seg.value) / (1.0 - vth))
            if tx < end:
                out.append((tx, HI))
                level = HI
        elif not seg.rising and level == HI and seg.value > vth:
            tx = seg.start + d.tau_down * math.log(seg.value / vth)
            if tx < end:
                out.append((tx, LO))
                level = LO
    return out


def analog_oracle(params: ChannelParams, initial: Level,
                  edges: Sequence[Transition]) -> List[Transition]:
    return [Transition(round_as(t), lv) for t, lv in analog_oracle_float(params, initial, edges)]
