import pytest
from hypothesis import given
from hypothesis import strategies as st

from idmsim.core import (FS, HI, LO, PS, TIME_MAX, ChannelParams, InvariantViolation,
                         Model, Polarity, Pulse, Trace, Transition, checked_time, format_time,
                         parse_time, pulses_of, round_as, transitions_of, validate_signal,
                         validate_trace)


def edges_from_gaps(initial, gaps, start=0):
    t, level, out = start, initial, []
    for g in gaps:
        t += g
        level = ~level
        out.append(Transition(t, level))
    return out


gaps = st.lists(st.integers(1, 10**7), max_size=40)


def test_level_negation_is_an_involution():
    for lv in (LO, HI):
        assert ~~lv == lv
        assert ~lv != lv


def test_round_ties_away_from_zero():
    assert round_as(2.5) == 3
    assert round_as(-2.5) == -3
    assert round_as(2.4999) == 2
    assert round_as(0.5) == 1


def test_round_rejects_non_finite_and_overflow():
    with pytest.raises(OverflowError):
        round_as(float("inf"))
    with pytest.raises(OverflowError):
        round_as(float("nan"))
    with pytest.raises(OverflowError):
        round_as(2.0**64)
    with pytest.raises(OverflowError):
        checked_time(TIME_MAX + 1)
    assert checked_time(TIME_MAX) == TIME_MAX


def test_time_literals():
    assert parse_time("4.6ps") == 4_600_000
    assert parse_time("100fs") == 100 * FS
    assert parse_time("12as") == 12
    assert parse_time("17") == 17
    assert parse_time("1ns") == 1000 * PS
    with pytest.raises(ValueError):
        parse_time("3 parsecs")
    assert format_time(4 * PS) == "4ps"


def test_channel_params_invariants():
    p = ChannelParams.ps(4.6, 5.8)
    assert (p.delta_inf_up, p.delta_inf_down, p.delta_pure, p.vth) == (4_600_000, 5_800_000, PS, 0.5)
    with pytest.raises(InvariantViolation):
        ChannelParams(500_000, 500_000)          # below the 1 ps pure delay
    with pytest.raises(InvariantViolation):
        ChannelParams(PS, 2 * PS, delta_pure=PS)
    with pytest.raises(InvariantViolation):
        ChannelParams(4 * PS, 4 * PS, vth=1.0)
    with pytest.raises(InvariantViolation):
        ChannelParams(4 * PS, 4 * PS, delta_pure=-1)
    assert p.with_model(Model.INERTIAL).model is Model.INERTIAL


def test_model_parse_aliases():
    assert Model.parse("IDM") is Model.IDM_EXP
    assert Model.parse("ine") is Model.INERTIAL
    assert Model.parse("pure") is Model.PURE
    with pytest.raises(ValueError):
        Model.parse("ddm")


def test_validate_examples():
    assert validate_signal(LO, [Transition(PS, HI), Transition(2 * PS, LO)]) is None
    assert validate_signal(LO, [Transition(PS, HI), Transition(PS, LO)]) == (1, "non-increasing time")
    assert validate_signal(LO, [Transition(PS, HI), Transition(2 * PS, HI)]) == (1, "non-alternating")
    assert validate_signal(HI, [Transition(PS, HI)]) == (0, "non-alternating")
    tr = Trace()
    tr.add_signal("a", LO)
    tr.add_signal("b", LO)
    tr.signals["b"] += [Transition(5, HI), Transition(3, LO)]
    bad = validate_trace(tr)
    assert (bad.signal, bad.index, bad.reason) == ("b", 1, "non-increasing time")


def test_pulse_examples():
    assert pulses_of([Transition(PS, HI), Transition(3 * PS, LO)], LO) == [Pulse(PS, 2 * PS, Polarity.UP)]
    assert pulses_of([Transition(PS, LO), Transition(6 * PS, HI)], HI) == [Pulse(PS, 5 * PS, Polarity.DOWN)]
    assert pulses_of([Transition(PS, HI)], LO) == []
    with pytest.raises(InvariantViolation):
        Pulse(0, 0, Polarity.UP)


@given(st.sampled_from([LO, HI]), gaps)
def test_pulses_count_width_and_round_trip(initial, g):
    edges = edges_from_gaps(initial, g)
    assert validate_signal(initial, edges) is None
    ps = pulses_of(edges, initial)
    assert len(ps) == len(edges) // 2
    assert all(p.width > 0 for p in ps)
    assert transitions_of(ps) == edges[: 2 * len(ps)]


def test_trace_queries():
    tr = Trace()
    tr.add_signal("x", LO)
    tr.signals["x"] += [Transition(10, HI), Transition(20, LO)]
    assert tr.level_at("x", 9) is LO
    assert tr.level_at("x", 10) is HI
    assert tr.final_level("x") is LO
    assert tr.count() == 2
