"""Ready-made stimuli and run recipes for the experiment circuits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .analysis import (Bisection, OscillationVerdict, PulseTrain, classify, find_critical_width,
                       train_of)
from .core import FS, HI, LO, PS, Model, Transition
from .engine import SimConfig, SimResult, Stimulus, pulse, simulate
from .fastsim import FlatCircuit, fast_simulate
from .netlist import (Circuit, adder_operands, build_adder, build_or_loop, build_sr_latch,
                      with_settled_inputs)

PULSE_START = 10 * PS


def runner(circuit: Circuit, config: SimConfig, fast: bool = True) -> Callable[[Stimulus], SimResult]:
    """Simulation function bound to one circuit; the compiled kernel by default."""
    if not fast:
        return lambda stim: simulate(circuit, stim, config)
    flat = FlatCircuit(circuit)
    return lambda stim: fast_simulate(circuit, stim, config, flat=flat)


# --- OR loop ------------------------------------------------------------------

def or_loop_bisect(n_feedback: int = 30, lo: int = 50 * PS, hi: int = 150 * PS,
                   config: Optional[SimConfig] = None) -> Bisection:
    """Critical input pulse width of the OR loop, judged on node ``A``."""
    config = config or SimConfig(Model.IDM_EXP, t_end=20_000 * PS)
    run = runner(build_or_loop(n_feedback), config)
    return find_critical_width(lambda w: run(pulse("I", PULSE_START, w)), "A", lo, hi)


# --- SR latch -----------------------------------------------------------------

@dataclass
class LatchRun:
    result: SimResult
    train_t: PulseTrain
    train_u: PulseTrain
    verdict_t: OscillationVerdict
    verdict_u: OscillationVerdict
    q_transitions: int
    qn_transitions: int

    @property
    def periods(self) -> int:
        return len(self.train_t)


def latch_stimulus(set_width: int, reset: Optional[Tuple[int, int]] = None) -> Dict[str, List[Transition]]:
    """Set pulse at ``PULSE_START``; ``reset`` is an optional ``(rise, width)`` pair."""
    stim = pulse("S", PULSE_START, set_width)
    if reset is not None:
        rise, width = reset
        stim.update(pulse("R", rise, width))
    return stim


def latch_run(circuit: Circuit, result: SimResult) -> LatchRun:
    nor = circuit.gate("NOR2").params
    tt, tu = train_of(result, "T"), train_of(result, "U")
    return LatchRun(result, tt, tu, classify(tt, nor), classify(tu, nor),
                    result.trace.count("Q"), result.trace.count("QN"))


def latch_set_width(config: Optional[SimConfig] = None, lo: int = 1 * PS,
                    hi: int = 40 * PS) -> Bisection:
    """Bracket of the set pulse width that just flips the latch (node ``T``)."""
    config = config or SimConfig(Model.IDM_EXP, t_end=20_000 * PS)
    run = runner(build_sr_latch(), config)
    return find_critical_width(lambda w: run(latch_stimulus(w)), "T", lo, hi)


@dataclass
class LatchRecipe:
    set_width: int
    reset_width: int
    reset_rise: int
    set_only: LatchRun
    set_reset: LatchRun


def latch_recipe(model: Model = Model.IDM_EXP, set_width: Optional[int] = None,
                 reset_width: int = 12 * PS, step: int = 200 * FS,
                 reset_rise: Optional[int] = None, t_end: int = 20_000 * PS) -> LatchRecipe:
    """Set-only versus set-plus-reset.

    Without an explicit ``set_width`` the IDM critical width (upper end of
    the bracket) is used.  Without an explicit ``reset_rise`` the reset pulse
    is slid in ``step`` increments across the last long HI phase of ``T`` of
    the IDM set-only run, and the placement giving the most ``T`` periods is
    kept.  Inertial runs reuse the IDM timing so both models see one stimulus.
    """
    circuit = build_sr_latch()
    idm = runner(circuit, SimConfig(Model.IDM_EXP, t_end=t_end))
    if set_width is None:
        set_width = latch_set_width(SimConfig(Model.IDM_EXP, t_end=t_end)).high
    if reset_rise is None:
        base = latch_run(circuit, idm(latch_stimulus(set_width)))
        reset_rise = _best_reset(circuit, idm, set_width, reset_width, base, step)
    run = idm if model is Model.IDM_EXP else runner(circuit, SimConfig(model, t_end=t_end))
    only = latch_run(circuit, run(latch_stimulus(set_width)))
    both = latch_run(circuit, run(latch_stimulus(set_width, (reset_rise, reset_width))))
    return LatchRecipe(set_width, reset_width, reset_rise, only, both)


def _best_reset(circuit: Circuit, run, set_width: int, reset_width: int, base: LatchRun,
                step: int) -> int:
    edges = base.result.trace.transitions("T")
    if len(edges) < 2:
        raise ValueError("set-only run shows no pulse on T; cannot place the reset")
    # the shaping buffer delays R by its static rising delay
    lead = circuit.gate("SHAPE_R").params.delta_inf_up
    last_rise = edges[-1].time if edges[-1].level == HI else edges[-2].time
    lo = max(last_rise - lead - 20 * PS, PULSE_START + set_width + step)
    hi = last_rise - lead + 20 * PS
    best, best_n = None, -1
    rise = lo
    while rise <= hi:
        n = latch_run(circuit, run(latch_stimulus(set_width, (rise, reset_width)))).periods
        if n > best_n:
            best, best_n = rise, n
        rise += step
    return best


# --- adder --------------------------------------------------------------------

ADDER_BITS = 4


def adder_circuit(direction: str = "up", n_bits: int = ADDER_BITS) -> Circuit:
    """Adder settled at ``A=0000, B=1111`` (up) or ``A=1000, B=1111`` (down).

    Operands are written with bit 0 first, so ``A=1000`` means ``A0=1``.
    """
    a = 0 if direction == "up" else 1
    ones = (1 << n_bits) - 1
    return with_settled_inputs(build_adder(n_bits), adder_operands(n_bits, a, ones))


def adder_stimulus(direction: str, width: int, start: int = PULSE_START) -> Dict[str, List[Transition]]:
    """Pulse on ``A0``: up from LO for ``up``, down from HI for ``down``."""
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    return pulse("A0", start, width, LO if direction == "up" else HI)


def adder_signals(n_bits: int = ADDER_BITS) -> List[str]:
    return [f"S{i}" for i in range(n_bits + 1)]


def propagated(result: SimResult, signals: Sequence[str]) -> frozenset:
    return frozenset(s for s in signals if result.trace.count(s))
