"""Trace analytics: pulse trains, oscillation verdicts, critical widths.

A verdict on a digital trace is only a rough guide to what the analog circuit
does.  In particular, the number of transitions a loop shows near its
equilibrium depends on the comparator threshold of the channels involved, so
the same analog trajectory can read as zero, one or many transitions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .core import HI, LO, ChannelParams, InvariantViolation, Level, Trace
from .engine import SimResult


@dataclass(frozen=True)
class PulseTrain:
    """HI/LO durations of successive periods at one node.

    Each entry is ``(hi, lo)``; ``lo`` is None for the last entry when the
    node stays LO until the end of the trace.  A final HI phase that never
    ends is not a period and is reflected in ``final_level`` only.
    """

    node: str
    entries: Tuple[Tuple[int, Optional[int]], ...]
    truncated: bool = False
    final_level: Level = LO
    transitions: int = 0
    last_time: Optional[int] = None

    def __post_init__(self):
        for hi, lo in self.entries:
            if hi <= 0 or (lo is not None and lo <= 0):
                raise InvariantViolation(f"non-positive width in pulse train of {self.node}")

    @property
    def highs(self) -> List[int]:
        return [hi for hi, _ in self.entries]

    @property
    def lows(self) -> List[int]:
        return [lo for _, lo in self.entries if lo is not None]

    def __len__(self) -> int:
        return len(self.entries)


def extract_pulse_train(trace: Trace, signal: str, truncated: bool = False) -> PulseTrain:
    """Pair each HI phase with the LO phase after it.

    Pass ``truncated=True`` when the run stopped before the node settled
    (event cap or horizon); see :func:`train_of`.
    """
    edges = trace.transitions(signal)
    entries = []
    rise = fall = hi = None
    for t, level in edges:
        if level == HI:
            if hi is not None:
                entries.append((hi, t - fall))
                hi = None
            rise = t
        elif rise is not None:
            hi = t - rise
            fall = t
            rise = None
    if hi is not None:
        entries.append((hi, None))
    return PulseTrain(signal, tuple(entries), truncated, trace.final_level(signal), len(edges),
                      edges[-1].time if edges else None)


def train_of(result: SimResult, signal: str) -> PulseTrain:
    return extract_pulse_train(result.trace, signal, result.capped or result.pending > 0)


class Kind(enum.Enum):
    GROWING = "growing"
    DECAYING = "decaying"
    SUSTAINED = "sustained"
    SETTLED_HI = "settled_hi"
    SETTLED_LO = "settled_lo"
    NONE = "none"


@dataclass(frozen=True)
class OscillationVerdict:
    kind: Kind
    metastability_suspect: bool
    resolution_time: Optional[int] = None


def _strictly(values: Sequence[int], increasing: bool) -> bool:
    pairs = zip(values, values[1:])
    if increasing:
        return all(b > a for a, b in pairs)
    return all(b < a for a, b in pairs)


def relative_spread(values: Sequence[int]) -> float:
    if not values:
        return 0.0
    lo, hi = min(values), max(values)
    return (hi - lo) / hi if hi else 0.0


def classify(train: PulseTrain, params: ChannelParams, k: int = 3, factor: float = 1.0,
             eps: float = 1e-6, window: int = 16) -> OscillationVerdict:
    """Verdict on a pulse train, judged against the loop gate's static delays.

    A period whose HI (LO) time is at or below ``factor`` times the rising
    (falling) static delay means the analog waveform cannot have reached the
    rails, so the train is flagged as a metastability suspect.
    """
    if k < 3:
        raise ValueError("trend detection needs k >= 3")
    recent = train.entries[-window:]
    suspect = any(hi <= factor * params.delta_inf_up or
                  (lo is not None and lo <= factor * params.delta_inf_down)
                  for hi, lo in recent)

    if not train.truncated:
        done = train.last_time
        if train.final_level == HI and train.transitions:
            return OscillationVerdict(Kind.SETTLED_HI, suspect, done)
        if len(train.entries) >= 2:
            return OscillationVerdict(Kind.DECAYING, suspect, done)
        if train.transitions:
            return OscillationVerdict(Kind.SETTLED_LO, suspect, done)
        return OscillationVerdict(Kind.NONE, suspect, None)

    highs = train.highs
    if len(highs) < k:
        return OscillationVerdict(Kind.NONE, suspect, None)
    tail_hi = highs[-window:]
    tail_lo = train.lows[-window:]
    if relative_spread(tail_hi) < eps and relative_spread(tail_lo) < eps:
        return OscillationVerdict(Kind.SUSTAINED, suspect, None)
    if _strictly(highs[-k:], increasing=True):
        return OscillationVerdict(Kind.GROWING, suspect, None)
    if _strictly(highs[-k:], increasing=False):
        return OscillationVerdict(Kind.DECAYING, suspect, None)
    return OscillationVerdict(Kind.NONE, suspect, None)


def first_differences(values: Sequence[int]) -> List[int]:
    return [b - a for a, b in zip(values, values[1:])]


def is_superlinear(values: Sequence[int]) -> bool:
    """First differences non-decreasing and eventually strictly increasing."""
    d = first_differences(values)
    if len(d) < 2:
        return False
    return all(b >= a for a, b in zip(d, d[1:])) and d[-1] > d[-2]


# --- critical width -----------------------------------------------------------

class BracketError(ValueError):
    pass


class BracketInvalid(BracketError):
    pass


class NonMonotoneObserved(BracketError):
    pass


class UndecidedProbe(BracketError):
    """A probe hit the event cap or horizon, so its outcome is unknown."""


def settles_flipped(train: PulseTrain, initial: Level = LO) -> bool:
    """Default bisection predicate: the node eventually rests at the other level."""
    return train.transitions > 0 and train.final_level != initial


def propagates(train: PulseTrain, initial: Level = LO) -> bool:
    return train.transitions > 0


@dataclass
class Bisection:
    low: int
    high: int
    probes: List[Tuple[int, bool]] = field(default_factory=list)

    @property
    def bracket(self) -> Tuple[int, int]:
        return self.low, self.high


def find_critical_width(run: Callable[[int], SimResult], signal: str, lo: int, hi: int,
                        resolution: int = 1,
                        predicate: Callable[[PulseTrain], bool] = settles_flipped,
                        check_points: Sequence[int] = ()) -> Bisection:
    """Bisect the input pulse width until the predicate flips within ``resolution``.

    ``run`` simulates one width.  ``lo`` must fail and ``hi`` must satisfy the
    predicate.  Widths in ``check_points`` are probed as well, and any that
    disagree with the final bracket raise :class:`NonMonotoneObserved`.
    """
    if resolution < 1:
        raise ValueError("resolution must be at least 1 as")
    if not 0 < lo < hi:
        raise BracketInvalid(f"need 0 < lo < hi, got ({lo}, {hi})")
    probes: List[Tuple[int, bool]] = []

    def probe(width: int) -> bool:
        res = run(width)
        train = train_of(res, signal)
        if train.truncated:
            raise UndecidedProbe(f"probe at {width} as did not settle")
        ok = predicate(train)
        probes.append((width, ok))
        return ok

    if probe(lo):
        raise BracketInvalid(f"lower width {lo} as already satisfies the predicate")
    if not probe(hi):
        raise BracketInvalid(f"upper width {hi} as does not satisfy the predicate")
    while hi - lo > resolution:
        mid = lo + (hi - lo) // 2
        if probe(mid):
            hi = mid
        else:
            lo = mid
    for w in check_points:
        ok = probe(w)
        if ok != (w >= hi):
            raise NonMonotoneObserved(
                f"probe at {w} as gave {ok}, inconsistent with bracket ({lo}, {hi})")
    return Bisection(lo, hi, probes)


# --- multi-signal checks ------------------------------------------------------

def first_transition(trace: Trace, signal: str) -> Optional[int]:
    edges = trace.transitions(signal)
    return edges[0].time if edges else None


def check_causal_order(trace: Trace, signals: Sequence[str]) -> Optional[Tuple[str, str]]:
    """First adjacent pair whose first transitions are not strictly ordered.

    A signal that never switches may only be followed by signals that never
    switch either.
    """
    for a, b in zip(signals, signals[1:]):
        ta, tb = first_transition(trace, a), first_transition(trace, b)
        if tb is None:
            continue
        if ta is None or tb <= ta:
            return a, b
    return None


def degradation_profile(trace: Trace, signals: Sequence[str]) -> Dict[str, Optional[int]]:
    """Width of the first pulse on each signal, None where there is none."""
    out: Dict[str, Optional[int]] = {}
    for s in signals:
        edges = trace.transitions(s)
        out[s] = edges[1].time - edges[0].time if len(edges) >= 2 else None
    return out
