"""Gate-level timing simulation with involution, inertial and pure delays."""

from .core import (AS, FS, HI, LO, NS, PS, ChannelParams, InvariantViolation, Level, Model,
                   Polarity, Pulse, Trace, Transition, parse_time, round_as)
from .channel import Channel, analog_oracle, delta_down, delta_up, derive, run_channel
from .netlist import (Circuit, Gate, GateKind, build_adder, build_buffer, build_clock_tree,
                      build_or_loop, build_sr_latch)
from .engine import SimConfig, SimResult, Status, pulse, run_sweep, simulate
from .fastsim import fast_simulate
from .analysis import (Kind, OscillationVerdict, PulseTrain, check_causal_order, classify,
                       degradation_profile, extract_pulse_train, find_critical_width)

__version__ = "0.1.0"

__all__ = [
    "AS",
    "FS",
    "HI",
    "LO",
    "NS",
    "PS",
    "ChannelParams",
    "InvariantViolation",
    "Level",
    "Model",
    "Polarity",
    "Pulse",
    "Trace",
    "Transition",
    "parse_time",
    "round_as",
    "Channel",
    "analog_oracle",
    "delta_down",
    "delta_up",
    "derive",
    "run_channel",
    "Circuit",
    "Gate",
    "GateKind",
    "build_adder",
    "build_buffer",
    "build_clock_tree",
    "build_or_loop",
    "build_sr_latch",
    "SimConfig",
    "SimResult",
    "Status",
    "pulse",
    "run_sweep",
    "simulate",
    "fast_simulate",
    "Kind",
    "OscillationVerdict",
    "PulseTrain",
    "check_causal_order",
    "classify",
    "degradation_profile",
    "extract_pulse_train",
    "find_critical_width",
]
