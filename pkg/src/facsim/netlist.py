"""Gate-level netlists: representation, validation, evaluation and fault overrides.

Nets are dense integer ids.  Input-port nets are the only undriven nets; every
other net is the output of exactly one gate.  Ports are ordered bit groups,
least significant bit first.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from facsim import _backend


class GateKind(enum.Enum):
    AND = 0
    OR = 1
    XOR = 2
    NOT = 3
    NAND = 4
    NOR = 5
    TIE0 = 6
    TIE1 = 7
    BUF = 8

    @property
    def arity(self) -> int:
        if self in (GateKind.TIE0, GateKind.TIE1):
            return 0
        if self in (GateKind.NOT, GateKind.BUF):
            return 1
        return 2

    @property
    def is_tie(self) -> bool:
        return self in (GateKind.TIE0, GateKind.TIE1)


_FUNCS = {
    GateKind.AND: lambda a, b: a & b,
    GateKind.OR: lambda a, b: a | b,
    GateKind.XOR: lambda a, b: a ^ b,
    GateKind.NAND: lambda a, b: 1 - (a & b),
    GateKind.NOR: lambda a, b: 1 - (a | b),
    GateKind.NOT: lambda a: 1 - a,
    GateKind.BUF: lambda a: a,
    GateKind.TIE0: lambda: 0,
    GateKind.TIE1: lambda: 1,
}


class FaultKind(enum.Enum):
    STUCK_AT_0 = "sa0"
    STUCK_AT_1 = "sa1"
    BIT_FLIP = "flip"

    @property
    def mode(self) -> int:
        return {"sa0": _backend.MODE_SA0, "sa1": _backend.MODE_SA1, "flip": _backend.MODE_FLIP}[self.value]


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    output: int
    inputs: tuple[int, ...] = ()


@dataclass(frozen=True)
class Fault:
    """A single perturbation on one net.  ``region`` must match the net's tag when given."""

    net: int
    kind: FaultKind
    region: str | None = None

    def __str__(self) -> str:
        return f"{self.kind.value}@{self.net}" + (f"[{self.region}]" if self.region else "")


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str
    net: int | None = None
    gate: int | None = None

    def __str__(self) -> str:
        return f"{self.rule}: {self.message}"


class NetlistError(ValueError):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


@dataclass
class Netlist:
    """Combinational gate DAG.  Treat as immutable once built."""

    num_nets: int = 0
    gates: list[Gate] = field(default_factory=list)
    inputs: dict[str, list[int]] = field(default_factory=dict)
    outputs: dict[str, list[int]] = field(default_factory=dict)
    regions: dict[int, str] = field(default_factory=dict)

    def input_width(self) -> int:
        return sum(len(v) for v in self.inputs.values())

    def output_width(self) -> int:
        return sum(len(v) for v in self.outputs.values())

    def region_names(self) -> list[str]:
        return sorted(set(self.regions.values()))

    def nets_in(self, regions: Iterable[str]) -> list[int]:
        wanted = set(regions)
        return sorted(n for n, r in self.regions.items() if r in wanted)

    @cached_property
    def program(self) -> "Program":
        diag = validate(self)
        if diag is not None:
            raise NetlistError(diag)
        return Program(self)


def validate(netlist: Netlist) -> Diagnostic | None:
    """Return ``None`` when every invariant holds, else the first violation found."""
    n = netlist.num_nets

    def bad_net(x: int) -> bool:
        return not (0 <= x < n)

    for gi, g in enumerate(netlist.gates):
        if len(g.inputs) != g.kind.arity:
            return Diagnostic("arity", f"gate {gi} ({g.kind.name}) takes {g.kind.arity} inputs, has {len(g.inputs)}", gate=gi)
        for x in (g.output, *g.inputs):
            if bad_net(x):
                return Diagnostic("net-range", f"gate {gi} references unknown net {x}", net=x, gate=gi)
    for kind, ports in (("input", netlist.inputs), ("output", netlist.outputs)):
        for name, nets in ports.items():
            for x in nets:
                if bad_net(x):
                    return Diagnostic("net-range", f"{kind} port {name} references unknown net {x}", net=x)
    for x in netlist.regions:
        if bad_net(x):
            return Diagnostic("net-range", f"region tag on unknown net {x}", net=x)

    input_nets: set[int] = set()
    for name, nets in netlist.inputs.items():
        for x in nets:
            if x in input_nets:
                return Diagnostic("port-conflict", f"net {x} appears twice among input ports", net=x)
            input_nets.add(x)

    driver: dict[int, int] = {}
    for gi, g in enumerate(netlist.gates):
        if g.output in input_nets:
            return Diagnostic("driven-input", f"input net {g.output} is driven by gate {gi}", net=g.output, gate=gi)
        if g.output in driver:
            return Diagnostic("multiple-drivers", f"net {g.output} driven by gates {driver[g.output]} and {gi}", net=g.output, gate=gi)
        driver[g.output] = gi
    for x in range(n):
        if x not in input_nets and x not in driver:
            return Diagnostic("undriven", f"net {x} is neither an input nor driven by a gate", net=x)

    cyc = _find_cycle(netlist, driver)
    if cyc is not None:
        return Diagnostic("cycle", f"combinational cycle through net {cyc}", net=cyc, gate=driver[cyc])

    for x in driver:
        if x not in netlist.regions:
            return Diagnostic("untagged", f"gate output net {x} has no region tag", net=x, gate=driver[x])
    for x in input_nets:
        if x in netlist.regions:
            return Diagnostic("tagged-input", f"input net {x} carries region tag {netlist.regions[x]!r}", net=x)
    # With a single driver per net and no cycles every output traces back to
    # inputs or tie cells, so output reachability needs no separate pass.
    return None


def _find_cycle(netlist: Netlist, driver: Mapping[int, int]) -> int | None:
    indeg = [len(g.inputs) for g in netlist.gates]
    consumers: dict[int, list[int]] = {}
    for gi, g in enumerate(netlist.gates):
        for x in g.inputs:
            consumers.setdefault(x, []).append(gi)
    ready: set[int] = set(range(netlist.num_nets)) - set(driver)
    queue = deque(gi for gi, d in enumerate(indeg) if d == 0)
    # primary inputs release their consumers first
    for x in ready:
        for gi in consumers.get(x, ()):
            indeg[gi] -= 1
            if indeg[gi] == 0:
                queue.append(gi)
    seen = 0
    done = [False] * len(netlist.gates)
    while queue:
        gi = queue.popleft()
        if done[gi]:
            continue
        done[gi] = True
        seen += 1
        for c in consumers.get(netlist.gates[gi].output, ()):
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    if seen == len(netlist.gates):
        return None
    # every unfinished gate has an unfinished driver upstream; walk until a repeat
    gi = min(i for i in range(len(done)) if not done[i])
    visited: set[int] = set()
    while gi not in visited:
        visited.add(gi)
        gi = next(driver[x] for x in netlist.gates[gi].inputs if x in driver and not done[driver[x]])
    return netlist.gates[gi].output


class Program:
    """Topologically ordered, array-encoded form of a validated netlist."""

    def __init__(self, netlist: Netlist):
        gates = netlist.gates
        driver = {g.output: gi for gi, g in enumerate(gates)}
        undriven = [x for x in range(netlist.num_nets) if x not in driver]
        order: list[int] = []
        # Kahn over gates; acyclicity already checked by validate()
        indeg = [len(g.inputs) for g in gates]
        consumers: dict[int, list[int]] = {}
        for gi, g in enumerate(gates):
            for x in g.inputs:
                consumers.setdefault(x, []).append(gi)
        queue = deque(gi for gi, g in enumerate(gates) if not g.inputs)
        for x in undriven:
            for gi in consumers.get(x, ()):
                indeg[gi] -= 1
                if indeg[gi] == 0:
                    queue.append(gi)
        while queue:
            gi = queue.popleft()
            order.append(gi)
            for c in consumers.get(gates[gi].output, ()):
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)

        self.num_nets = netlist.num_nets
        self.order = order
        self.ops = np.array([gates[gi].kind.value for gi in order], dtype=np.int8)
        self.in0 = np.array([gates[gi].inputs[0] if gates[gi].inputs else -1 for gi in order], dtype=np.int32)
        self.in1 = np.array([gates[gi].inputs[1] if len(gates[gi].inputs) > 1 else -1 for gi in order], dtype=np.int32)
        self.outs = np.array([gates[gi].output for gi in order], dtype=np.int32)
        self.position = np.full(netlist.num_nets, -1, dtype=np.int64)
        self.position[self.outs] = np.arange(len(order))
        pos_of_gate = {gi: p for p, gi in enumerate(order)}
        self.consumers = {x: sorted({pos_of_gate[c] for c in cs}) for x, cs in consumers.items()}
        self.input_nets = [x for nets in netlist.inputs.values() for x in nets]
        self.output_nets = [x for nets in netlist.outputs.values() for x in nets]
        self.all_positions = np.arange(len(order), dtype=np.int32)

    def cone(self, net: int) -> np.ndarray:
        """Topological positions of every gate in the transitive fanout of ``net``."""
        hit: set[int] = set()
        stack = [net]
        while stack:
            x = stack.pop()
            for p in self.consumers.get(x, ()):
                if p not in hit:
                    hit.add(p)
                    stack.append(int(self.outs[p]))
        return np.array(sorted(hit), dtype=np.int32)


# -- scalar reference evaluation ---------------------------------------------

def _check_assignment(netlist: Netlist, assignment: Mapping[str, Sequence[int]]) -> None:
    extra = set(assignment) - set(netlist.inputs)
    if extra:
        raise ValueError(f"unknown input ports: {sorted(extra)}")
    for name, nets in netlist.inputs.items():
        if name not in assignment:
            raise ValueError(f"missing input port {name!r}")
        bits = assignment[name]
        if len(bits) != len(nets):
            raise ValueError(f"port {name!r} expects {len(nets)} bits, got {len(bits)}")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"port {name!r} bits must be 0 or 1")


def _evaluate(netlist: Netlist, assignment, fault: Fault | None) -> dict[str, list[int]]:
    prog = netlist.program
    _check_assignment(netlist, assignment)
    if fault is not None:
        _check_fault(netlist, fault)
    val = [0] * netlist.num_nets

    def settle(x: int, v: int) -> None:
        if fault is not None and fault.net == x:
            if fault.kind is FaultKind.STUCK_AT_0:
                v = 0
            elif fault.kind is FaultKind.STUCK_AT_1:
                v = 1
            else:
                v ^= 1
        val[x] = v

    for name, nets in netlist.inputs.items():
        for x, b in zip(nets, assignment[name]):
            settle(x, int(b))
    for gi in prog.order:
        g = netlist.gates[gi]
        settle(g.output, _FUNCS[g.kind](*(val[x] for x in g.inputs)))
    return {name: [val[x] for x in nets] for name, nets in netlist.outputs.items()}


def evaluate(netlist: Netlist, assignment: Mapping[str, Sequence[int]]) -> dict[str, list[int]]:
    """Evaluate one input vector.  Bits per port are ordered LSB first."""
    return _evaluate(netlist, assignment, None)


def evaluate_with_fault(netlist: Netlist, assignment: Mapping[str, Sequence[int]], fault: Fault) -> dict[str, list[int]]:
    return _evaluate(netlist, assignment, fault)


def _check_fault(netlist: Netlist, fault: Fault) -> None:
    if not (0 <= fault.net < netlist.num_nets):
        raise ValueError(f"fault on unknown net {fault.net}")
    if fault.region is not None and netlist.regions.get(fault.net) != fault.region:
        raise ValueError(f"fault region {fault.region!r} does not match net {fault.net} tag {netlist.regions.get(fault.net)!r}")


def to_bits(value: int, width: int) -> list[int]:
    return [(value >> i) & 1 for i in range(width)]


def from_bits(bits: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def evaluate_words(netlist: Netlist, fault: Fault | None = None, **ports: int) -> dict[str, int]:
    """Integer convenience wrapper around :func:`evaluate`."""
    assignment = {name: to_bits(ports.get(name, 0), len(nets)) for name, nets in netlist.inputs.items()}
    for name in ports:
        if name not in netlist.inputs:
            raise ValueError(f"unknown input port {name!r}")
    out = _evaluate(netlist, assignment, fault)
    return {name: from_bits(bits) for name, bits in out.items()}


# -- structural metrics ---------------------------------------------------------

def depth(netlist: Netlist) -> int:
    """Longest input-to-output path in gate levels; tie cells sit at level 0."""
    prog = netlist.program
    level = [0] * netlist.num_nets
    for gi in prog.order:
        g = netlist.gates[gi]
        if g.kind.is_tie:
            continue
        level[g.output] = 1 + max(level[x] for x in g.inputs)
    return max((level[x] for x in prog.output_nets), default=0)


DEFAULT_WEIGHTS = {k: (0.0 if k.is_tie else 1.0) for k in GateKind}


def gate_count(netlist: Netlist, weights: Mapping[GateKind, float] | None = None) -> float:
    w = dict(DEFAULT_WEIGHTS)
    if weights:
        for k, v in weights.items():
            if v < 0:
                raise ValueError("gate weights must be non-negative")
            w[k] = v
    netlist.program  # validates
    total = sum(w[g.kind] for g in netlist.gates)
    return int(total) if float(total).is_integer() else total


# -- packed bit-parallel simulation ---------------------------------------------

def pack_lanes(values: np.ndarray, nbits: int) -> np.ndarray:
    """Transpose ``values`` (one integer per vector) to ``(nbits, words)`` uint64 lanes."""
    values = np.asarray(values, dtype=np.uint64)
    n = values.shape[0]
    nwords = max(1, -(-n // 64))
    out = np.zeros((nbits, nwords), dtype=np.uint64)
    for i in range(nbits):
        bits = ((values >> np.uint64(i)) & np.uint64(1)).astype(np.uint8)
        packed = np.packbits(bits, bitorder="little")
        buf = np.zeros(nwords * 8, dtype=np.uint8)
        buf[: packed.size] = packed
        out[i] = buf.view("<u8")
    return out


def unpack_lanes(rows: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_lanes`.  Returns uint64 (object dtype beyond 64 bits)."""
    nbits = rows.shape[0]
    bits = np.unpackbits(np.ascontiguousarray(rows).astype("<u8").view(np.uint8).reshape(nbits, -1),
                         axis=1, bitorder="little")[:, :n]
    if nbits <= 64:
        out = np.zeros(n, dtype=np.uint64)
        for i in range(nbits):
            out |= bits[i].astype(np.uint64) << np.uint64(i)
        return out
    out = np.zeros(n, dtype=object)
    for i in range(nbits):
        out += bits[i].astype(object) * (1 << i)
    return out


class PackedSimulation:
    """Fault-free packed evaluation of many vectors, reusable for fault runs.

    ``inputs`` maps every input port to an array of integers, one per vector.
    """

    def __init__(self, netlist: Netlist, inputs: Mapping[str, np.ndarray]):
        self.netlist = netlist
        self.prog = prog = netlist.program
        if set(inputs) != set(netlist.inputs):
            raise ValueError(f"inputs must cover exactly the ports {sorted(netlist.inputs)}")
        sizes = {np.asarray(v).shape[0] for v in inputs.values()}
        if len(sizes) > 1:
            raise ValueError("input arrays differ in length")
        self.n = sizes.pop() if sizes else 1
        self.nwords = max(1, -(-self.n // 64))
        self.golden = np.zeros((netlist.num_nets, self.nwords), dtype=np.uint64)
        for name, nets in netlist.inputs.items():
            vals = np.asarray(inputs[name], dtype=np.uint64)
            if len(nets) < 64 and np.any(vals >> np.uint64(len(nets))):
                raise ValueError(f"values for port {name!r} exceed {len(nets)} bits")
            if nets:
                self.golden[nets] = pack_lanes(vals, len(nets))
        self._no_mode = np.zeros(netlist.num_nets, dtype=np.uint8)
        _backend.run_gates(prog.ops, prog.in0, prog.in1, prog.outs, prog.all_positions, self.golden, self._no_mode)
        mask = np.zeros(self.nwords, dtype=np.uint64)
        full, rem = divmod(self.n, 64)
        mask[:full] = np.uint64(0xFFFFFFFFFFFFFFFF)
        if rem:
            mask[full] = np.uint64((1 << rem) - 1)
        self.lane_mask = mask
        self.out_nets = np.array(prog.output_nets, dtype=np.int64)

    def with_faults(self, faults: Sequence[Fault]) -> np.ndarray:
        """Net values with all ``faults`` applied at once; only their fanout cones are recomputed."""
        vals = self.golden.copy()
        modes = self._no_mode.copy()
        cones = []
        for f in faults:
            _check_fault(self.netlist, f)
            modes[f.net] = f.kind.mode
            if self.prog.position[f.net] < 0:
                _backend.apply_mode(vals, f.net, f.kind.mode)
            else:
                cones.append(np.array([self.prog.position[f.net]], dtype=np.int32))
            cones.append(self.prog.cone(f.net))
        seq = np.unique(np.concatenate(cones)).astype(np.int32) if cones else self.prog.all_positions[:0]
        _backend.run_gates(self.prog.ops, self.prog.in0, self.prog.in1, self.prog.outs, seq, vals, modes)
        return vals

    def with_fault(self, fault: Fault) -> np.ndarray:
        return self.with_faults([fault])

    def mismatch_lanes(self, vals: np.ndarray) -> np.ndarray:
        """Per-word bitmask of vectors whose outputs differ from the fault-free run."""
        if not len(self.out_nets):
            return np.zeros(self.nwords, dtype=np.uint64)
        diff = np.bitwise_or.reduce(vals[self.out_nets] ^ self.golden[self.out_nets], axis=0)
        return diff & self.lane_mask

    def outputs(self, vals: np.ndarray | None = None) -> dict[str, np.ndarray]:
        vals = self.golden if vals is None else vals
        return {name: unpack_lanes(vals[nets], self.n) if nets else np.zeros(self.n, dtype=np.uint64)
                for name, nets in self.netlist.outputs.items()}

    def output_word(self, vals: np.ndarray | None = None) -> np.ndarray:
        """All output ports concatenated, first declared port least significant."""
        vals = self.golden if vals is None else vals
        return unpack_lanes(vals[self.out_nets], self.n)


def simulate(netlist: Netlist, inputs: Mapping[str, np.ndarray], fault: Fault | None = None) -> dict[str, np.ndarray]:
    """Vectorised evaluation of many input words at once."""
    sim = PackedSimulation(netlist, inputs)
    return sim.outputs(None if fault is None else sim.with_fault(fault))


# -- text format ------------------------------------------------------------------
#
#   # free comment lines
#   netlist <num_nets>
#   input <name> <net> ...
#   output <name> <net> ...
#   region <label> <net> ...
#   <KIND> <out> [<in1> [<in2>]]

def to_text(netlist: Netlist, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"netlist {netlist.num_nets}")
    for name, nets in netlist.inputs.items():
        lines.append(" ".join(["input", name, *map(str, nets)]))
    for name, nets in netlist.outputs.items():
        lines.append(" ".join(["output", name, *map(str, nets)]))
    by_region: dict[str, list[int]] = {}
    for net, label in sorted(netlist.regions.items()):
        by_region.setdefault(label, []).append(net)
    for label, nets in by_region.items():
        lines.append(" ".join(["region", label, *map(str, nets)]))
    for g in netlist.gates:
        lines.append(" ".join([g.kind.name, str(g.output), *map(str, g.inputs)]))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Netlist:
    """Parse :func:`to_text` output.  Structural problems surface via :func:`validate`."""
    nl = Netlist()
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, *rest = line.split()
        try:
            if head == "netlist":
                nl.num_nets = int(rest[0])
                seen_header = True
            elif head in ("input", "output", "region"):
                name, nets = rest[0], [int(x) for x in rest[1:]]
                if head == "input":
                    nl.inputs[name] = nets
                elif head == "output":
                    nl.outputs[name] = nets
                else:
                    for x in nets:
                        nl.regions[x] = name
            else:
                nl.gates.append(Gate(GateKind[head], int(rest[0]), tuple(int(x) for x in rest[1:])))
        except (IndexError, KeyError, ValueError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from exc
    if not seen_header:
        raise ValueError("missing 'netlist <num_nets>' header")
    return nl
