"""Hypothesis strategies shared by the simulator tests."""

from hypothesis import strategies as st

from idmsim.core import PS, ChannelParams, Level, Transition
from idmsim.netlist import Circuit, Gate, GateKind

KINDS = list(GateKind)


@st.composite
def params(draw, dp_max=1 * PS):
    dp = draw(st.integers(0, dp_max))
    up = draw(st.integers(dp + 1 * PS, dp + 8 * PS))
    down = draw(st.integers(dp + 1 * PS, dp + 8 * PS))
    return ChannelParams(up, down, dp, draw(st.sampled_from([0.3, 0.5, 0.7])))


@st.composite
def circuits(draw, max_gates=8, loops=True):
    """Random gate networks over two or three primary inputs.

    Inputs of gate ``k`` are drawn from primary inputs and earlier outputs;
    with ``loops`` they may also name later outputs.
    """
    n_in = draw(st.integers(1, 3))
    n = draw(st.integers(1, max_gates))
    pis = [f"i{k}" for k in range(n_in)]
    outs = [f"n{k}" for k in range(n)]
    gates = []
    for k in range(n):
        kind = draw(st.sampled_from(KINDS))
        pool = pis + (outs if loops else outs[:k])
        ins = tuple(draw(st.sampled_from(pool)) for _ in range(kind.arity))
        gates.append(Gate(f"g{k}", kind, ins, outs[k], draw(params())))
    init = {s: Level(draw(st.integers(0, 1))) for s in pis + outs}
    return Circuit(gates, pis, outs[-2:], init)


@st.composite
def stimuli(draw, circuit, max_edges=10, max_gap=12 * PS):
    stim = {}
    for s in circuit.inputs:
        t, level, edges = 0, circuit.init[s], []
        for _ in range(draw(st.integers(0, max_edges))):
            t += draw(st.integers(1, max_gap))
            level = ~level
            edges.append(Transition(t, level))
        stim[s] = edges
    return stim
