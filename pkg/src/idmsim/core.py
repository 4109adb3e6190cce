"""Primitive value types shared by every part of the simulator.

Time is an integer count of attoseconds.  Python ints never overflow, so the
signed 64-bit contract is enforced explicitly by :func:`checked_time`.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence

AS = 1
FS = 1_000
PS = 1_000_000
NS = 1_000_000_000

TIME_MAX = 2**63 - 1
TIME_MIN = -(2**63)

_UNITS = {"as": AS, "fs": FS, "ps": PS, "ns": NS, "us": 1000 * NS}
_TIME_RE = re.compile(r"^\s*([-+]?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)\s*([a-z]*)\s*$")


class InvariantViolation(ValueError):
    """A value type was constructed with out-of-contract fields."""


def checked_time(value: int) -> int:
    if not TIME_MIN <= value <= TIME_MAX:
        raise OverflowError(f"time {value} as exceeds the signed 64-bit range")
    return value


def round_as(x: float) -> int:
    """Round a float attosecond value to the nearest integer, ties away from zero."""
    if math.isnan(x) or math.isinf(x):
        raise OverflowError(f"cannot schedule at non-finite time {x}")
    r = math.floor(abs(x) + 0.5)
    return checked_time(int(r) if x >= 0 else -int(r))


def parse_time(text: str) -> int:
    """Parse ``"4.6ps"``, ``"100fs"``, ``"12as"`` or a bare attosecond count."""
    m = _TIME_RE.match(text)
    if not m:
        raise ValueError(f"bad time literal {text!r}")
    number, unit = m.groups()
    if unit and unit not in _UNITS:
        raise ValueError(f"unknown time unit {unit!r} in {text!r}")
    scale = _UNITS[unit or "as"]
    if re.fullmatch(r"[-+]?\d+", number):
        return checked_time(int(number) * scale)
    return round_as(float(number) * scale)


def format_time(t: int) -> str:
    if t % PS == 0:
        return f"{t // PS}ps"
    return f"{t / PS:.6f}ps"


class Level(enum.IntEnum):
    LO = 0
    HI = 1

    def __invert__(self) -> "Level":
        return Level(1 - self)


LO = Level.LO
HI = Level.HI


class Model(enum.Enum):
    PURE = "pure"
    INERTIAL = "inertial"
    IDM_EXP = "idm"

    @classmethod
    def parse(cls, text: str) -> "Model":
        key = text.strip().lower()
        aliases = {"ine": "inertial", "idm_exp": "idm", "exp": "idm"}
        return cls(aliases.get(key, key))


class Transition(NamedTuple):
    time: int
    level: Level


class Polarity(enum.Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class Pulse:
    start: int
    width: int
    polarity: Polarity

    def __post_init__(self):
        if self.width <= 0:
            raise InvariantViolation(f"pulse width must be positive, got {self.width}")


@dataclass(frozen=True)
class ChannelParams:
    """Static description of one gate output channel.

    ``delta_inf_up``/``delta_inf_down`` are the total static delays; the part
    left after removing ``delta_pure`` is what the exponential waveforms cover.
    """

    delta_inf_up: int
    delta_inf_down: int
    delta_pure: int = 1 * PS
    vth: float = 0.5
    model: Model = Model.IDM_EXP

    def __post_init__(self):
        if self.delta_pure < 0:
            raise InvariantViolation("delta_pure must be >= 0")
        if self.delta_inf_up <= self.delta_pure or self.delta_inf_down <= self.delta_pure:
            raise InvariantViolation(
                f"static delays ({self.delta_inf_up}, {self.delta_inf_down}) as must exceed "
                f"the pure delay {self.delta_pure} as"
            )
        if not 0.0 < self.vth < 1.0:
            raise InvariantViolation(f"vth must lie in (0, 1), got {self.vth}")

    def with_model(self, model: Model) -> "ChannelParams":
        if model is self.model:
            return self
        return ChannelParams(self.delta_inf_up, self.delta_inf_down, self.delta_pure, self.vth, model)

    @classmethod
    def ps(cls, up: float, down: float, dp: float = 1.0, vth: float = 0.5,
           model: Model = Model.IDM_EXP) -> "ChannelParams":
        return cls(round_as(up * PS), round_as(down * PS), round_as(dp * PS), vth, model)


@dataclass
class Trace:
    """Digital waveforms: an initial level plus an edge list per signal."""

    initial: Dict[str, Level] = field(default_factory=dict)
    signals: Dict[str, List[Transition]] = field(default_factory=dict)

    def add_signal(self, name: str, initial: Level) -> None:
        self.initial[name] = Level(initial)
        self.signals.setdefault(name, [])

    def transitions(self, name: str) -> List[Transition]:
        return self.signals[name]

    def final_level(self, name: str) -> Level:
        edges = self.signals[name]
        return edges[-1].level if edges else self.initial[name]

    def level_at(self, name: str, t: int) -> Level:
        level = self.initial[name]
        for tr in self.signals[name]:
            if tr.time > t:
                break
            level = tr.level
        return level

    def count(self, name: Optional[str] = None) -> int:
        if name is not None:
            return len(self.signals[name])
        return sum(len(v) for v in self.signals.values())

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.initial == other.initial and self.signals == other.signals


class TraceViolation(NamedTuple):
    signal: str
    index: int
    reason: str


def validate_signal(initial: Level, edges: Sequence[Transition]) -> Optional[tuple]:
    """Return ``(index, reason)`` for the first bad edge, or None."""
    prev_t = None
    prev_level = initial
    for i, (t, level) in enumerate(edges):
        if prev_t is not None and t <= prev_t:
            return i, "non-increasing time"
        if level == prev_level:
            return i, "non-alternating"
        prev_t, prev_level = t, level
    return None


def validate_trace(trace: Trace) -> Optional[TraceViolation]:
    """First violation of ordering or alternation in ``trace``, None if valid."""
    for name in sorted(trace.signals):
        bad = validate_signal(trace.initial[name], trace.signals[name])
        if bad is not None:
            return TraceViolation(name, *bad)
    return None


def pulses_of(edges: Sequence[Transition], initial: Level) -> List[Pulse]:
    """Pair consecutive edges into pulses; a trailing lone edge is dropped."""
    out = []
    for i in range(0, len(edges) - 1, 2):
        first, second = edges[i], edges[i + 1]
        polarity = Polarity.UP if first.level == HI else Polarity.DOWN
        out.append(Pulse(first.time, second.time - first.time, polarity))
    return out


def transitions_of(pulses: Sequence[Pulse]) -> List[Transition]:
    out = []
    for p in pulses:
        lead = HI if p.polarity is Polarity.UP else LO
        out.append(Transition(p.start, lead))
        out.append(Transition(p.start + p.width, ~lead))
    return out
