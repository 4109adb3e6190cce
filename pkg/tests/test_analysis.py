import pytest
from hypothesis import given, strategies as st

from idmsim.analysis import (BracketInvalid, Kind, NonMonotoneObserved, PulseTrain, UndecidedProbe,
                             check_causal_order, classify, degradation_profile,
                             extract_pulse_train, find_critical_width, first_differences,
                             is_superlinear, propagates, relative_spread, train_of)
from idmsim.core import HI, LO, PS, ChannelParams, InvariantViolation, Model, Trace, Transition
from idmsim.engine import SimConfig, pulse, simulate
from idmsim.netlist import build_buffer

OR = ChannelParams.ps(4.6, 5.8)


def _trace(edges, initial=LO, name="A"):
    tr = Trace()
    tr.add_signal(name, initial)
    tr.signals[name].extend(Transition(t, lv) for t, lv in edges)
    return tr


def _train(pairs, truncated=True):
    return PulseTrain("A", tuple(pairs), truncated, HI, 2 * len(pairs), 1)


def test_pulse_train_example():
    tr = _trace([(1 * PS, HI), (3 * PS, LO), (4 * PS, HI), (7 * PS, LO)])
    train = extract_pulse_train(tr, "A")
    assert train.entries == ((2 * PS, 1 * PS), (3 * PS, None))
    assert train.highs == [2 * PS, 3 * PS] and train.lows == [1 * PS]


def test_single_step_gives_empty_train_and_settled_verdict():
    train = extract_pulse_train(_trace([(1 * PS, HI)]), "A")
    assert len(train) == 0
    assert classify(train, OR).kind is Kind.SETTLED_HI
    assert classify(extract_pulse_train(_trace([]), "A"), OR).kind is Kind.NONE


def test_train_rejects_non_positive_widths():
    with pytest.raises(InvariantViolation):
        PulseTrain("A", ((0, 1),))


def test_capped_run_gives_truncated_train():
    from idmsim.netlist import Circuit, Gate, GateKind
    ring = Circuit([Gate("inv", GateKind.INV, ("y",), "y", ChannelParams.ps(2, 2))], [], [])
    res = simulate(ring, {}, SimConfig(Model.IDM_EXP, max_events=30))
    train = train_of(res, "y")
    assert train.truncated
    assert classify(train, ChannelParams.ps(2, 2)).kind is Kind.SUSTAINED


def test_verdict_examples():
    v = classify(_train([(4 * PS, 7 * PS)] * 3), OR)
    assert v.metastability_suspect
    grow = _train([(5 * PS * 2 ** n, 6 * PS * 2 ** n) for n in range(4)])
    v = classify(grow, OR)
    assert v.kind is Kind.GROWING and not v.metastability_suspect
    flat = _train([(3 * PS, 3 * PS)] * 20)
    assert classify(flat, OR).kind is Kind.SUSTAINED
    shrink = _train([(9 * PS - n * PS, 9 * PS) for n in range(4)])
    assert classify(shrink, OR).kind is Kind.DECAYING


def test_completed_runs_are_judged_by_their_end_state():
    two = PulseTrain("A", ((5, 5), (4, None)), False, LO, 4, 20)
    assert classify(two, OR).kind is Kind.DECAYING
    one = PulseTrain("A", ((5, None),), False, LO, 2, 20)
    assert classify(one, OR).kind is Kind.SETTLED_LO
    with pytest.raises(ValueError):
        classify(two, OR, k=2)


@given(st.lists(st.integers(1, 10**9), min_size=1, max_size=30))
def test_spread_is_a_fraction(values):
    assert 0.0 <= relative_spread(values) < 1.0


@given(st.lists(st.integers(-10**6, 10**6), min_size=2, max_size=30))
def test_superlinear_means_convex(values):
    if is_superlinear(values):
        d = first_differences(values)
        assert all(b >= a for a, b in zip(d, d[1:]))


def test_superlinear_examples():
    assert is_superlinear([1, 2, 4, 8, 16])
    assert not is_superlinear([1, 2, 3, 4])
    assert not is_superlinear([1, 3, 4, 6])


def _buffer_runner(params):
    c = build_buffer({"buf": params})
    cfg = SimConfig(Model.IDM_EXP, t_end=200 * PS)
    return lambda w: simulate(c, pulse("I", 10 * PS, w), cfg)


def test_symmetric_channel_critical_width():
    p = ChannelParams.ps(4, 4, 0.0)
    b = find_critical_width(_buffer_runner(p), "O", 1 * PS, 10 * PS, predicate=propagates)
    assert b.bracket == (4 * PS - 1, 4 * PS)
    q = ChannelParams.ps(4, 4, 1.0)
    b = find_critical_width(_buffer_runner(q), "O", 1 * PS, 10 * PS, predicate=propagates)
    assert b.bracket == (3 * PS, 3 * PS + 1)


def test_bracket_errors():
    run = _buffer_runner(ChannelParams.ps(4, 4, 0.0))
    with pytest.raises(BracketInvalid):
        find_critical_width(run, "O", 5 * PS, 10 * PS, predicate=propagates)
    with pytest.raises(BracketInvalid):
        find_critical_width(run, "O", 1 * PS, 2 * PS, predicate=propagates)
    with pytest.raises(BracketInvalid):
        find_critical_width(run, "O", 0, 2 * PS, predicate=propagates)


def test_non_monotone_probe_is_reported():
    run = _buffer_runner(ChannelParams.ps(4, 4, 0.0))
    # a predicate that only holds inside a window
    window = lambda train: train.transitions > 0 and train.entries[0][0] < 3 * PS
    with pytest.raises(NonMonotoneObserved):
        find_critical_width(run, "O", 1 * PS, 5 * PS, predicate=window, check_points=[20 * PS])


def test_undecided_probe():
    c = build_buffer()
    cfg = SimConfig(Model.IDM_EXP, t_end=12 * PS)
    run = lambda w: simulate(c, pulse("I", 10 * PS, w), cfg)
    with pytest.raises(UndecidedProbe):
        find_critical_width(run, "O", 1 * PS, 10 * PS, predicate=propagates)


def test_causal_order():
    tr = Trace()
    for name, t in (("S0", 5), ("S1", 7), ("S2", None)):
        tr.add_signal(name, LO)
        if t is not None:
            tr.signals[name].extend([Transition(t, HI), Transition(t + 10, LO)])
    assert check_causal_order(tr, ["S0", "S1", "S2"]) is None
    assert check_causal_order(tr, ["S1", "S0"]) == ("S1", "S0")
    assert check_causal_order(tr, ["S2", "S0"]) == ("S2", "S0")
    assert check_causal_order(tr, ["S0"]) is None


def test_degradation_profile():
    tr = Trace()
    tr.add_signal("X", LO)
    tr.signals["X"].extend([Transition(5, HI), Transition(12, LO)])
    tr.add_signal("Y", LO)
    assert degradation_profile(tr, ["X", "Y"]) == {"X": 7, "Y": None}
