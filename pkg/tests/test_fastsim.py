import pytest
from hypothesis import given, strategies as st

from idmsim.core import HI, LO, PS, ChannelParams, Model, Transition
from idmsim.engine import SimConfig, SimulationError, pulse, simulate
from idmsim.experiments import adder_circuit, adder_stimulus
from idmsim.fastsim import FlatCircuit, fast_simulate, flatten_stimulus
from idmsim.netlist import build_buffer, build_or_loop

from strategies import circuits, stimuli


def _same(a, b):
    assert a.trace == b.trace
    assert (a.status, a.committed, a.cancelled, a.scheduled, a.pending) == \
        (b.status, b.committed, b.cancelled, b.scheduled, b.pending)


@given(st.data())
def test_kernel_matches_reference_engine(data):
    c = data.draw(circuits())
    stim = data.draw(stimuli(c))
    model = data.draw(st.sampled_from(list(Model)))
    cfg = SimConfig(model, t_end=data.draw(st.integers(50, 500)) * PS, max_events=4000)
    _same(simulate(c, stim, cfg), fast_simulate(c, stim, cfg))


@pytest.mark.parametrize("model", [Model.IDM_EXP, Model.INERTIAL])
@pytest.mark.parametrize("width", [12 * PS, 16 * PS, 16 * PS + 123])
def test_kernel_matches_on_adder(model, width):
    c = adder_circuit("up")
    stim = adder_stimulus("up", width, 10 * PS)
    cfg = SimConfig(model, t_end=400 * PS)
    _same(simulate(c, stim, cfg), fast_simulate(c, stim, cfg))


def test_kernel_matches_on_or_loop_near_critical():
    c = build_or_loop(30)
    cfg = SimConfig(Model.IDM_EXP, t_end=20_000 * PS)
    stim = pulse("I", 10 * PS, 91_565_001)
    _same(simulate(c, stim, cfg), fast_simulate(c, stim, cfg))


def test_counters_only_mode_and_reuse():
    c = build_or_loop(3)
    stim = pulse("I", 10 * PS, 95 * PS)
    cfg = SimConfig(Model.IDM_EXP, t_end=2000 * PS)
    flat = FlatCircuit(c)
    prepared = flatten_stimulus(flat, stim)
    full = fast_simulate(c, stim, cfg)
    bare = fast_simulate(c, stim, cfg, flat=flat, prepared=prepared, record=False)
    assert bare.committed == full.committed and bare.cancelled == full.cancelled
    assert all(not e for e in bare.trace.signals.values())


def test_record_buffer_regrows():
    # more recorded edges than the initial buffer holds
    edges = [Transition(10 * PS * (k + 1), HI if k % 2 == 0 else LO) for k in range(40_000)]
    cfg = SimConfig(Model.INERTIAL, t_end=500_000 * PS)
    res = fast_simulate(build_buffer(), {"I": edges}, cfg)
    assert len(res.trace.transitions("O")) == 40_000


def test_queue_overflow_is_an_error():
    # a symmetric pure delay keeps every edge in flight
    c = build_buffer({"buf": ChannelParams.ps(4, 4, model=Model.PURE)})
    edges = [Transition(k * 10, HI if k % 2 else LO) for k in range(1, 60)]
    cfg = SimConfig(Model.PURE, t_end=100 * PS)
    with pytest.raises(SimulationError):
        fast_simulate(c, {"I": edges}, cfg, depth=4)
    assert fast_simulate(c, {"I": edges}, cfg, depth=64).committed == 59
