"""Gate library, circuit container and generators for the experiment circuits."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .core import LO, ChannelParams, Level


class NetlistError(ValueError):
    pass


class ArityMismatch(NetlistError):
    pass


class MultipleDrivers(NetlistError):
    pass


class GateKind(enum.Enum):
    BUF = "buf"
    INV = "inv"
    AND2 = "and2"
    OR2 = "or2"
    NAND2 = "nand2"
    NOR2 = "nor2"
    XOR2 = "xor2"

    @property
    def arity(self) -> int:
        return 1 if self in (GateKind.BUF, GateKind.INV) else 2


_TABLES = {
    GateKind.BUF: lambda a: a,
    GateKind.INV: lambda a: 1 - a,
    GateKind.AND2: lambda a, b: a & b,
    GateKind.OR2: lambda a, b: a | b,
    GateKind.NAND2: lambda a, b: 1 - (a & b),
    GateKind.NOR2: lambda a, b: 1 - (a | b),
    GateKind.XOR2: lambda a, b: a ^ b,
}


def evaluate_gate(kind: GateKind, levels: Sequence[Level]) -> Level:
    if len(levels) != kind.arity:
        raise ArityMismatch(f"{kind.value} takes {kind.arity} inputs, got {len(levels)}")
    return Level(_TABLES[kind](*(int(x) for x in levels)))


@dataclass(frozen=True)
class Gate:
    name: str
    kind: GateKind
    inputs: Tuple[str, ...]
    output: str
    params: Optional[ChannelParams] = None

    def __post_init__(self):
        if len(self.inputs) != self.kind.arity:
            raise ArityMismatch(
                f"gate {self.name}: {self.kind.value} takes {self.kind.arity} inputs, got {len(self.inputs)}")


@dataclass
class Circuit:
    """Signals with initial levels, gates, and the primary interface.

    Combinational loops are allowed.  Signals without an explicit initial
    level start LO; the engine reconciles inconsistent starting states at t=0.
    """

    gates: List[Gate]
    inputs: List[str]
    outputs: List[str]
    init: Dict[str, Level] = field(default_factory=dict)

    def __post_init__(self):
        drivers: Dict[str, str] = {}
        for g in self.gates:
            if g.output in drivers:
                raise MultipleDrivers(f"signal {g.output} driven by {drivers[g.output]} and {g.name}")
            drivers[g.output] = g.name
        for s in self.inputs:
            if s in drivers:
                raise MultipleDrivers(f"primary input {s} is driven by gate {drivers[s]}")
        names = [g.name for g in self.gates]
        if len(set(names)) != len(names):
            raise NetlistError("duplicate gate instance names")
        known = set(drivers) | set(self.inputs)
        for g in self.gates:
            for s in g.inputs:
                if s not in known:
                    raise NetlistError(f"gate {g.name} reads undriven signal {s}")
        for s in self.outputs:
            if s not in known:
                raise NetlistError(f"primary output {s} is undriven")
        self.init = {s: Level(self.init.get(s, LO)) for s in self.signals()}

    def signals(self) -> List[str]:
        seen: Dict[str, None] = dict.fromkeys(self.inputs)
        for g in self.gates:
            seen.setdefault(g.output)
            for s in g.inputs:
                seen.setdefault(s)
        return list(seen)

    def gate(self, name: str) -> Gate:
        for g in self.gates:
            if g.name == name:
                return g
        raise KeyError(name)

    def driver(self, signal: str) -> Optional[Gate]:
        for g in self.gates:
            if g.output == signal:
                return g
        return None

    def with_params(self, params: Mapping[str, ChannelParams]) -> "Circuit":
        gates = [replace(g, params=params.get(g.name, g.params)) for g in self.gates]
        return Circuit(gates, list(self.inputs), list(self.outputs), dict(self.init))

    def with_init(self, levels: Mapping[str, Level]) -> "Circuit":
        init = dict(self.init)
        init.update(levels)
        return Circuit(list(self.gates), list(self.inputs), list(self.outputs), init)


def settle(circuit: Circuit, fixed: Optional[Mapping[str, Level]] = None,
           max_rounds: int = 1000) -> Dict[str, Level]:
    """Zero-delay relaxation from the circuit's initial levels.

    Gates are evaluated in order until nothing changes; a loop that keeps
    toggling raises NetlistError.
    """
    levels = dict(circuit.init)
    if fixed:
        levels.update(fixed)
    for _ in range(max_rounds):
        changed = False
        for g in circuit.gates:
            v = evaluate_gate(g.kind, [levels[s] for s in g.inputs])
            if levels[g.output] != v:
                levels[g.output] = v
                changed = True
        if not changed:
            return levels
    raise NetlistError("circuit does not settle under zero-delay evaluation")


def replicate(circuit: Circuit, copies: int, fmt: str = "u{k}/") -> Circuit:
    """Independent instances with prefixed names and no shared nets."""
    gates: List[Gate] = []
    inputs: List[str] = []
    outputs: List[str] = []
    init: Dict[str, Level] = {}
    for k in range(copies):
        pre = fmt.format(k=k)
        for g in circuit.gates:
            gates.append(Gate(pre + g.name, g.kind, tuple(pre + s for s in g.inputs), pre + g.output, g.params))
        inputs += [pre + s for s in circuit.inputs]
        outputs += [pre + s for s in circuit.outputs]
        init.update({pre + s: v for s, v in circuit.init.items()})
    return Circuit(gates, inputs, outputs, init)


# --- default delays ------------------------------------------------------------
# OR-gate delays were extracted for the experiment circuit; everything else is a
# plausible picosecond-scale choice that reproduces the qualitative findings.

P = ChannelParams.ps

OR_LOOP_ROLES: Dict[str, ChannelParams] = {
    "or": P(4.6, 5.8),
    "feedback": P(2.0, 2.2),
    "node_b": P(120.0, 130.0),
    "out": P(3.0, 3.3),
    "shape": P(90.0, 95.0),
}

SR_LATCH_ROLES: Dict[str, ChannelParams] = {
    "nor": P(5.0, 6.0),
    "couple": P(2.0, 2.4),
    "out": P(3.0, 3.3),
    "shape": P(10.0, 11.0),
}

ADDER_ROLES: Dict[str, ChannelParams] = {
    "xor": P(5.5, 6.0),
    "and": P(4.8, 4.2),
    "or": P(5.4, 4.9),
    "shape": P(8.0, 9.0),
}

TREE_ROLES: Dict[str, ChannelParams] = {"inv": P(3.0, 2.6)}

BUFFER_ROLES: Dict[str, ChannelParams] = {"buf": P(4.6, 5.8)}


def _roles(defaults: Mapping[str, ChannelParams],
           overrides: Optional[Mapping[str, ChannelParams]]) -> Dict[str, ChannelParams]:
    roles = dict(defaults)
    for k, v in (overrides or {}).items():
        if k not in roles:
            raise KeyError(f"unknown role {k!r}; expected one of {sorted(roles)}")
        roles[k] = v
    return roles


def build_buffer(params: Optional[Mapping[str, ChannelParams]] = None) -> Circuit:
    """One buffer from ``I`` to ``O``; the unit under test for pulse sweeps."""
    r = _roles(BUFFER_ROLES, params)
    return Circuit([Gate("BUF", GateKind.BUF, ("I",), "O", r["buf"])], ["I"], ["O"])


def build_or_loop(n_feedback: int, params: Optional[Mapping[str, ChannelParams]] = None,
                  shaping: bool = True) -> Circuit:
    """OR gate whose output ``A`` returns to its second input over
    ``n_feedback`` buffers (``FB0`` .. ``FBn-1``); ``A`` also feeds the loaded
    buffer to ``B`` and the output buffer to ``O``.

    With ``shaping`` an extra high-delay buffer sits between the primary input
    ``I`` and the OR gate (signal ``I_s``).
    """
    if n_feedback < 0:
        raise ValueError("n_feedback must be >= 0")
    r = _roles(OR_LOOP_ROLES, params)
    gates = []
    or_in = "I"
    if shaping:
        gates.append(Gate("SHAPE_I", GateKind.BUF, ("I",), "I_s", r["shape"]))
        or_in = "I_s"
    prev = "A"
    for i in range(n_feedback):
        gates.append(Gate(f"G_FB{i}", GateKind.BUF, (prev,), f"FB{i}", r["feedback"]))
        prev = f"FB{i}"
    gates.insert(1 if shaping else 0, Gate("OR", GateKind.OR2, (or_in, prev), "A", r["or"]))
    gates.append(Gate("BUF_B", GateKind.BUF, ("A",), "B", r["node_b"]))
    gates.append(Gate("BUF_O", GateKind.BUF, ("B",), "O", r["out"]))
    return Circuit(gates, ["I"], ["O"])


def build_sr_latch(params: Optional[Mapping[str, ChannelParams]] = None,
                   shaping: bool = True, state: Level = LO) -> Circuit:
    """Cross-coupled NOR latch: ``U = NOR(S, T')``, ``T = NOR(U', R)`` with
    one coupling buffer on each feedback path, ``Q`` buffered from ``T`` and
    ``QN`` buffered from ``U``.  ``state`` selects the stored value of ``Q``.
    """
    r = _roles(SR_LATCH_ROLES, params)
    gates = []
    s_in, r_in = "S", "R"
    if shaping:
        gates += [Gate("SHAPE_S", GateKind.BUF, ("S",), "S_s", r["shape"]),
                  Gate("SHAPE_R", GateKind.BUF, ("R",), "R_s", r["shape"])]
        s_in, r_in = "S_s", "R_s"
    gates += [
        Gate("NOR1", GateKind.NOR2, (s_in, "T_c"), "U", r["nor"]),
        Gate("NOR2", GateKind.NOR2, ("U_c", r_in), "T", r["nor"]),
        Gate("CPL_T", GateKind.BUF, ("T",), "T_c", r["couple"]),
        Gate("CPL_U", GateKind.BUF, ("U",), "U_c", r["couple"]),
        Gate("BUF_QN", GateKind.BUF, ("U",), "QN", r["out"]),
        Gate("BUF_Q", GateKind.BUF, ("T",), "Q", r["out"]),
    ]
    c = Circuit(gates, ["S", "R"], ["Q", "QN"])
    q = Level(state)
    return c.with_init({"T": q, "T_c": q, "Q": q, "U": ~q, "U_c": ~q, "QN": ~q})


def build_adder(n_bits: int, params: Optional[Mapping[str, ChannelParams]] = None,
                shaping: bool = True) -> Circuit:
    """Ripple-carry adder over ``A0..``, ``B0..`` with carry-in ``C0`` (held LO
    as a primary input).  Sum outputs are ``S0..S{n-1}``; ``S{n}`` is the final
    carry.  Each full adder uses two XOR2, two AND2 and one OR2.
    """
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    r = _roles(ADDER_ROLES, params)
    gates: List[Gate] = []
    inputs = [f"A{i}" for i in range(n_bits)] + [f"B{i}" for i in range(n_bits)] + ["C0"]

    def src(name: str) -> str:
        if not shaping or name == "C0":
            return name
        gates.append(Gate(f"SHAPE_{name}", GateKind.BUF, (name,), f"{name}_s", r["shape"]))
        return f"{name}_s"

    a = [src(f"A{i}") for i in range(n_bits)]
    b = [src(f"B{i}") for i in range(n_bits)]
    carry = "C0"
    for i in range(n_bits):
        cout = f"S{n_bits}" if i == n_bits - 1 else f"C{i + 1}"
        gates += [
            Gate(f"FA{i}_X1", GateKind.XOR2, (a[i], b[i]), f"X{i}", r["xor"]),
            Gate(f"FA{i}_X2", GateKind.XOR2, (f"X{i}", carry), f"S{i}", r["xor"]),
            Gate(f"FA{i}_A1", GateKind.AND2, (carry, f"X{i}"), f"P{i}", r["and"]),
            Gate(f"FA{i}_A2", GateKind.AND2, (a[i], b[i]), f"G{i}", r["and"]),
            Gate(f"FA{i}_O1", GateKind.OR2, (f"P{i}", f"G{i}"), cout, r["or"]),
        ]
        carry = cout
    return Circuit(gates, inputs, [f"S{i}" for i in range(n_bits + 1)])


def adder_operands(n_bits: int, a: int, b: int) -> Dict[str, Level]:
    """Input levels for ``A = a``, ``B = b`` with bit 0 on ``A0``/``B0``."""
    lv = {f"A{i}": Level((a >> i) & 1) for i in range(n_bits)}
    lv.update({f"B{i}": Level((b >> i) & 1) for i in range(n_bits)})
    lv["C0"] = LO
    return lv


def with_settled_inputs(circuit: Circuit, levels: Mapping[str, Level]) -> Circuit:
    """Circuit whose every signal starts at the zero-delay steady state."""
    return circuit.with_init(settle(circuit, levels))


def build_clock_tree(n_inverters: int = 227, n_sinks: int = 123,
                     params: Optional[Mapping[str, ChannelParams]] = None) -> Circuit:
    """Inverter fan-out tree rooted at ``CLK`` whose ``n_sinks`` leaf outputs
    are the primary outputs.

    Inverter ``i`` is driven by inverter ``floor((i-1) * internal / (n-1))``,
    which spreads children evenly over the ``n - n_sinks`` internal nodes.
    """
    if not 0 < n_sinks < n_inverters:
        raise ValueError("need 0 < n_sinks < n_inverters")
    r = _roles(TREE_ROLES, params)
    internal = n_inverters - n_sinks
    gates = [Gate("INV0", GateKind.INV, ("CLK",), "N0", r["inv"])]
    for i in range(1, n_inverters):
        parent = (i - 1) * internal // (n_inverters - 1)
        gates.append(Gate(f"INV{i}", GateKind.INV, (f"N{parent}",), f"N{i}", r["inv"]))
    c = Circuit(gates, ["CLK"], [f"N{i}" for i in range(internal, n_inverters)])
    return with_settled_inputs(c, {"CLK": LO})

