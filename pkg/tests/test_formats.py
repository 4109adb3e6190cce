import pytest
from hypothesis import given, strategies as st

from idmsim.core import HI, LO, PS, InvariantViolation, Trace, Transition
from idmsim.engine import SimConfig, pulse, simulate
from idmsim.formats import (FormatSyntaxError, MissingDelay, NonAlternating, NonMonotonicStimulus,
                            ParseError, UnknownGateKind, UnknownInput, UnknownInstance,
                            bind_delays, parse_delays, parse_netlist, parse_stimulus,
                            read_trace_csv, write_profile_csv, write_stimulus, write_sweep_csv,
                            write_trace_csv, write_train_csv, write_vcd)
from idmsim.netlist import ArityMismatch, GateKind, MultipleDrivers, NetlistError

from strategies import circuits, stimuli

LOOP = """\
# OR loop with one feedback buffer
input I
output O
gate or2 G1 A I FB   # the loop gate
gate buf F0 FB A
gate buf BO O A
"""

DELAYS = """\
G1 4600000 5800000
default 2000000 2200000 vth=0.4 dp=500000
"""


def test_netlist_example():
    c = parse_netlist(LOOP)
    g = c.gate("G1")
    assert g.kind is GateKind.OR2 and g.output == "A" and g.inputs == ("I", "FB")
    assert c.inputs == ["I"] and c.outputs == ["O"]


def test_undeclared_reads_become_inputs():
    c = parse_netlist("gate and2 G X P Q\noutput X\n")
    assert c.inputs == ["P", "Q"]


@pytest.mark.parametrize("text, err, line", [
    ("gate or2 G1 A I FB\ngate buf G2 A I\n", MultipleDrivers, 2),
    ("gate buf B1 X Y Z\n", ArityMismatch, 1),
    ("input I\ngate frob G X I\n", UnknownGateKind, 2),
    ("\n\nwire X\n", FormatSyntaxError, 3),
    ("init A 2\n", FormatSyntaxError, 1),
    ("input I\ngate buf G I X\n", MultipleDrivers, 2),
])
def test_netlist_errors_carry_lines(text, err, line):
    with pytest.raises(err) as info:
        parse_netlist(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_delay_examples():
    t = parse_delays("G1 4600000 5800000\n")
    p = t.entries["G1"]
    assert (p.delta_inf_up, p.delta_inf_down, p.delta_pure, p.vth) == (4600000, 5800000, PS, 0.5)
    with pytest.raises(InvariantViolation) as info:
        parse_delays("# header\nG1 500000 500000\n")
    assert info.value.line == 2
    c = bind_delays(parse_netlist(LOOP), parse_delays(DELAYS))
    assert c.gate("G1").params.delta_inf_up == 4600000
    f = c.gate("F0").params
    assert (f.delta_inf_up, f.vth, f.delta_pure) == (2000000, 0.4, 500000)


def test_delay_binding_errors():
    with pytest.raises(UnknownInstance) as info:
        bind_delays(parse_netlist(LOOP), parse_delays("G1 4600000 5800000\nZZ 1 2 dp=0\n"))
    assert info.value.line == 2
    with pytest.raises(MissingDelay):
        bind_delays(parse_netlist(LOOP), parse_delays("G1 4600000 5800000\n"))
    with pytest.raises(FormatSyntaxError):
        parse_delays("G1 4.6 5.8\n")
    with pytest.raises(FormatSyntaxError):
        parse_delays("G1 4600000 5800000 tau=3\n")


def test_stimulus_examples():
    c = parse_netlist(LOOP)
    stim = parse_stimulus("1000000 I 1\n3000000 I 0\n", c)
    assert stim == {"I": [Transition(1 * PS, HI), Transition(3 * PS, LO)]}
    with pytest.raises(NonMonotonicStimulus) as info:
        parse_stimulus("1000000 I 1\n1000000 I 0\n", c)
    assert info.value.line == 2
    with pytest.raises(NonAlternating):
        parse_stimulus("1000000 I 0\n", c)
    with pytest.raises(UnknownInput):
        parse_stimulus("1000000 A 1\n", c)


@given(st.data())
def test_stimulus_round_trip(data):
    c = data.draw(circuits())
    stim = {s: e for s, e in data.draw(stimuli(c)).items() if e}
    assert parse_stimulus(write_stimulus(stim), c) == stim


_ALLOWED = (ParseError, NetlistError, InvariantViolation)


def _mutations():
    lines = (LOOP + "init FB 1\n").splitlines()
    junk = st.sampled_from(["gate", "xor2", "5", "=", "#", "buf", "A", "init", "Q 1", "-3", "dp=x"])
    return st.lists(st.tuples(st.integers(0, len(lines) - 1), st.integers(0, 3), junk),
                    min_size=1, max_size=4).map(lambda ops: (lines, ops))


def _mutate(lines, ops):
    out = list(lines)
    for i, op, tok in ops:
        i %= len(out) if out else 1
        if not out:
            out.append(tok)
        elif op == 0:
            del out[i]
        elif op == 1:
            out.insert(i, out[i])
        elif op == 2:
            words = out[i].split()
            out[i] = " ".join(words[:-1] + [tok]) if words else tok
        else:
            out[i] = out[i] + " " + tok
    return "\n".join(out) + "\n"


@given(_mutations())
def test_fuzzed_netlists_fail_only_with_documented_errors(case):
    text = _mutate(*case)
    try:
        parse_netlist(text)
    except _ALLOWED as exc:
        line = getattr(exc, "line", None)
        if line is not None:
            assert 1 <= line <= text.count("\n")


@given(st.lists(st.tuples(st.sampled_from(["G1", "default", "X"]),
                          st.sampled_from(["4600000", "0", "-1", "4.6", "x", "900000"]),
                          st.sampled_from(["5800000", "2000000", ""]),
                          st.sampled_from(["", "vth=0.3", "vth=1.5", "dp=0", "dp=7000000", "k=1"])),
                max_size=5))
def test_fuzzed_delays_fail_only_with_documented_errors(rows):
    text = "".join(" ".join(x for x in r if x) + "\n" for r in rows)
    try:
        parse_delays(text)
    except _ALLOWED as exc:
        assert exc.line is not None


# --- writers -------------------------------------------------------------------

def _one_edge():
    tr = Trace()
    tr.add_signal("O", LO)
    tr.signals["O"].append(Transition(4_600_000, HI))
    return tr


def test_vcd_empty_trace():
    text = write_vcd(Trace())
    assert "$timescale 1fs $end" in text
    assert text.endswith("$dumpvars\n$end\n")


def test_vcd_edge_at_fs_scale():
    text = write_vcd(_one_edge())
    assert "#4600\n1!\n" in text
    assert "$var wire 1 ! O $end" in text
    assert "#5\n" in write_vcd(_one_edge(), "1ps")


def test_vcd_nudges_collapsed_edges():
    tr = Trace()
    tr.add_signal("X", LO)
    tr.signals["X"].extend([Transition(10_000, HI), Transition(10_400, LO)])
    warnings = []
    text = write_vcd(tr, "1fs", warnings)
    assert "#10\n1!\n#11\n0!\n" in text
    assert len(warnings) == 1
    with pytest.raises(ValueError):
        write_vcd(tr, "1as")


@given(st.data())
def test_trace_csv_round_trip(data):
    c = data.draw(circuits())
    res = simulate(c, data.draw(stimuli(c)), SimConfig(t_end=200 * PS, max_events=2000))
    assert read_trace_csv(write_trace_csv(res.trace)) == res.trace


def test_csv_rows():
    assert write_trace_csv(_one_edge()) == "signal,time_as,level\nO,init,0\nO,4600000,1\n"
    from idmsim.engine import SweepPoint
    assert write_sweep_csv([SweepPoint(5, None), SweepPoint(7, 2)]) == \
        "delta_i_as,delta_o_as\n5,CANCELLED\n7,2\n"
    from idmsim.analysis import PulseTrain
    assert write_train_csv(PulseTrain("A", ((3, 4), (5, None)))) == "n,hi_as,lo_as\n1,3,4\n2,5,\n"
    assert write_profile_csv({"S0": 7, "S1": None}) == "signal,first_width_as\nS0,7\nS1,NONE\n"


def test_trace_csv_errors():
    with pytest.raises(FormatSyntaxError):
        read_trace_csv("a,b,c\n")
    with pytest.raises(FormatSyntaxError) as info:
        read_trace_csv("signal,time_as,level\nO,5,1\n")
    assert info.value.line == 2


def test_parsed_netlist_simulates():
    c = bind_delays(parse_netlist(LOOP), parse_delays(DELAYS))
    res = simulate(c, pulse("I", 10 * PS, 30 * PS), SimConfig())
    # the loop latches HI once the pulse has gone around
    assert res.trace.final_level("O") == HI
