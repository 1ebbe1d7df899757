"""Builders for adders, majority voters and the redundant compositions.

Region labels used throughout:

* ``cla`` for a plain carry-lookahead adder, ``sig``/``lsp`` for the accurate
  and approximate parts of the imprecise adder;
* ``u1.``, ``u2.``, ... prefixes for each replica of a redundant circuit;
* ``voter1`` (significant outputs ``V1``) and ``voter2`` (less-significant
  outputs ``V2``/``V2*``);
* ``lsp`` for the single unprotected lower slice of MVRPR.
"""

from __future__ import annotations

import enum
import itertools
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from facsim.netlist import Gate, GateKind, Netlist, NetlistError, validate
from facsim.words import AdderSpec, Strategy

GROUP = 4


class NetlistBuilder:
    """Incremental netlist construction with a current region label."""

    def __init__(self, region: str = "core"):
        self.num_nets = 0
        self.gates: list[Gate] = []
        self.inputs: dict[str, list[int]] = {}
        self.outputs: dict[str, list[int]] = {}
        self.regions: dict[int, str] = {}
        self.current = region

    @contextmanager
    def region(self, label: str):
        prev, self.current = self.current, label
        try:
            yield
        finally:
            self.current = prev

    def _net(self) -> int:
        self.num_nets += 1
        return self.num_nets - 1

    def input(self, name: str, width: int) -> list[int]:
        if name in self.inputs:
            raise ValueError(f"duplicate input port {name!r}")
        nets = [self._net() for _ in range(width)]
        self.inputs[name] = nets
        return nets

    def output(self, name: str, nets: Sequence[int]) -> None:
        if name in self.outputs:
            raise ValueError(f"duplicate output port {name!r}")
        self.outputs[name] = list(nets)

    def gate(self, kind: GateKind, *inputs: int, region: str | None = None) -> int:
        out = self._net()
        self.gates.append(Gate(kind, out, tuple(inputs)))
        self.regions[out] = region or self.current
        return out

    def tree(self, kind: GateKind, nets: Sequence[int]) -> int:
        """Balanced reduction of ``nets`` with a 2-input ``kind`` gate."""
        level = list(nets)
        if not level:
            raise ValueError("empty reduction")
        while len(level) > 1:
            nxt = [self.gate(kind, level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        return level[0]

    def instantiate(self, sub: Netlist, inputs: Mapping[str, Sequence[int]], prefix: str) -> dict[str, list[int]]:
        """Copy ``sub`` into this netlist, wiring its input ports to ``inputs``.

        Region labels are prefixed with ``prefix``.  Returns the copy's output nets.
        """
        sub.program  # must be valid
        mapping: dict[int, int] = {}
        for name, nets in sub.inputs.items():
            if len(inputs[name]) != len(nets):
                raise ValueError(f"port {name!r} width mismatch")
            mapping.update(zip(nets, inputs[name]))
        for g in sub.gates:
            mapping[g.output] = self._net()
        for g in sub.gates:
            self.gates.append(Gate(g.kind, mapping[g.output], tuple(mapping[x] for x in g.inputs)))
            self.regions[mapping[g.output]] = prefix + sub.regions[g.output]
        return {name: [mapping[x] for x in nets] for name, nets in sub.outputs.items()}

    def build(self) -> Netlist:
        nl = Netlist(self.num_nets, list(self.gates), dict(self.inputs), dict(self.outputs), dict(self.regions))
        diag = validate(nl)
        if diag is not None:
            raise NetlistError(diag)
        return nl


# -- adders -----------------------------------------------------------------------

def _emit_cla(b: NetlistBuilder, a: Sequence[int], bb: Sequence[int], cin: int | None) -> list[int]:
    """4-bit lookahead groups, rippling the group carry.  Returns len(a)+1 sum nets."""
    sums: list[int] = []
    carry = cin
    for start in range(0, len(a), GROUP):
        ga, gb = a[start:start + GROUP], bb[start:start + GROUP]
        g = [b.gate(GateKind.AND, x, y) for x, y in zip(ga, gb)]
        p = [b.gate(GateKind.XOR, x, y) for x, y in zip(ga, gb)]
        prods: dict[tuple[int, int], int] = {}

        def prod(lo: int, hi: int) -> int:
            # AND of p[lo..hi], shared between carry terms
            if lo == hi:
                return p[lo]
            if (lo, hi) not in prods:
                mid = (lo + hi) // 2
                prods[lo, hi] = b.gate(GateKind.AND, prod(lo, mid), prod(mid + 1, hi))
            return prods[lo, hi]

        carries = [carry]
        for i in range(len(g)):
            terms = [g[i]] + [b.gate(GateKind.AND, prod(j + 1, i), g[j]) for j in range(i - 1, -1, -1)]
            gen = b.tree(GateKind.OR, terms)
            if carry is None:
                carries.append(gen)
            else:
                carries.append(b.gate(GateKind.OR, gen, b.gate(GateKind.AND, prod(0, i), carry)))
        for j in range(len(g)):
            sums.append(p[j] if carries[j] is None else b.gate(GateKind.XOR, p[j], carries[j]))
        carry = carries[-1]
    sums.append(carry)
    return sums


def build_cla(width: int, carry_in: bool = False) -> Netlist:
    """Unsigned ``width``-bit carry-lookahead adder: ports ``A``, ``B`` (and ``CIN``) -> ``SUM``."""
    if not (1 <= width <= 64):
        raise ValueError(f"CLA width must be in 1..64, got {width}")
    b = NetlistBuilder(region="cla")
    A = b.input("A", width)
    B = b.input("B", width)
    cin = b.input("CIN", 1)[0] if carry_in else None
    b.output("SUM", _emit_cla(b, A, B, cin))
    return b.build()


def build_imprecise_adder(spec: AdderSpec) -> Netlist:
    """The approximate-lower-part adder; regions ``lsp`` and ``sig``.

    The AND of ``A[L-1]`` and ``B[L-1]`` is the carry link into the accurate part
    and belongs to ``lsp``.
    """
    N, L = spec.N, spec.L
    b = NetlistBuilder()
    A = b.input("A", N)
    B = b.input("B", N)
    k = spec.constant_bits
    with b.region("lsp"):
        low = [b.gate(GateKind.TIE1) for _ in range(k)]
        if spec.strategy is Strategy.OR_BITS:
            low += [b.gate(GateKind.OR, A[i], B[i]) for i in range(k, L)]
        link = b.gate(GateKind.AND, A[L - 1], B[L - 1])
    with b.region("sig"):
        upper = _emit_cla(b, A[L:], B[L:], link)
    b.output("SUM", low + upper)
    return b.build()


# -- voting -----------------------------------------------------------------------

def _emit_majority(b: NetlistBuilder, bits: Sequence[int]) -> int:
    """Sum of products over every (r+1)/2-subset; for three inputs XY + XZ + YZ."""
    need = (len(bits) + 1) // 2
    terms = [b.tree(GateKind.AND, combo) for combo in itertools.combinations(bits, need)]
    return b.tree(GateKind.OR, terms)


def _check_replicas(replicas: int) -> None:
    if replicas < 3 or replicas % 2 == 0:
        raise ValueError(f"replica count must be odd and >= 3, got {replicas}")


def build_voter(replicas: int, width: int) -> Netlist:
    """Bitwise majority of ports ``X0..X{r-1}`` onto ``V``."""
    _check_replicas(replicas)
    if width < 1:
        raise ValueError("voter width must be >= 1")
    b = NetlistBuilder(region="voter")
    xs = [b.input(f"X{i}", width) for i in range(replicas)]
    b.output("V", [_emit_majority(b, [x[i] for x in xs]) for i in range(width)])
    return b.build()


# -- redundant compositions -------------------------------------------------------

class Scheme(enum.Enum):
    SINGLE = "single"
    TMR = "tmr"
    FAC = "fac"
    MVRPR = "mvrpr"


@dataclass
class RedundantCircuit:
    """A netlist plus the bookkeeping the fault tools need.

    Output ports are declared low part first, so the concatenated outputs read
    as one unsigned sum.
    """

    netlist: Netlist
    scheme: Scheme
    name: str
    replicas: dict[str, tuple[str, ...]]
    replica_outputs: dict[str, list[int]]
    voter_regions: tuple[str, ...] = ()
    unprotected: tuple[str, ...] = ()
    low_port: str = "V2"
    high_port: str = "V1"
    params: dict = field(default_factory=dict)

    @property
    def replica_regions(self) -> tuple[str, ...]:
        return tuple(r for regs in self.replicas.values() for r in regs)


def _compose(unit: Netlist, copies: int, low_bits: int, scheme: Scheme, name: str,
             low_port: str, params: dict) -> RedundantCircuit:
    width = unit.output_width()
    if not (0 <= low_bits <= width):
        raise ValueError(f"low_bits must be in 0..{width}")
    b = NetlistBuilder()
    shared = {port: b.input(port, len(nets)) for port, nets in unit.inputs.items()}
    unit_regions = unit.region_names()
    replicas, outs = {}, {}
    for i in range(1, copies + 1):
        label = f"u{i}"
        ports = b.instantiate(unit, shared, prefix=f"{label}.")
        outs[label] = [x for nets in ports.values() for x in nets]
        replicas[label] = tuple(f"{label}.{r}" for r in unit_regions)
    voters = []
    if copies == 1:
        flat = outs["u1"]
        low, high = flat[:low_bits], flat[low_bits:]
    else:
        with b.region("voter2"):
            low = [_emit_majority(b, [o[i] for o in outs.values()]) for i in range(low_bits)]
        with b.region("voter1"):
            high = [_emit_majority(b, [o[i] for o in outs.values()]) for i in range(low_bits, width)]
        voters = [v for v, bits in (("voter1", high), ("voter2", low)) if bits]
    b.output(low_port, low)
    b.output("V1", high)
    return RedundantCircuit(b.build(), scheme, name, replicas, outs, tuple(voters), (), low_port, "V1", params)


def _unit(unit: Netlist | Callable[[], Netlist]) -> Netlist:
    nl = unit() if callable(unit) else unit
    diag = validate(nl)
    if diag is not None:
        raise NetlistError(diag)
    return nl


def build_single(unit: Netlist | Callable[[], Netlist], low_bits: int = 0, name: str = "single") -> RedundantCircuit:
    return _compose(_unit(unit), 1, low_bits, Scheme.SINGLE, name, "V2", {})


def build_tmr(unit: Netlist | Callable[[], Netlist], low_bits: int = 0, replicas: int = 3,
              name: str = "tmr") -> RedundantCircuit:
    """Replicate ``unit`` on shared inputs and vote every output bit.

    The lowest ``low_bits`` unit output bits go through ``voter2`` onto ``V2``,
    the rest through ``voter1`` onto ``V1``.
    """
    _check_replicas(replicas)
    return _compose(_unit(unit), replicas, low_bits, Scheme.TMR, name, "V2", {"replicas": replicas})


def build_fac(spec: AdderSpec, replicas: int = 3) -> RedundantCircuit:
    """Replicated imprecise adders; ``V1`` votes the accurate part, ``V2*`` the approximate part."""
    _check_replicas(replicas)
    params = {"N": spec.N, "L": spec.L, "strategy": spec.strategy.value, "replicas": replicas}
    return _compose(build_imprecise_adder(spec), replicas, spec.L, Scheme.FAC,
                    f"fac-N{spec.N}-L{spec.L}", "V2*", params)


def build_tmr_adder(width: int, low_bits: int = 0, replicas: int = 3) -> RedundantCircuit:
    return build_tmr(build_cla(width), low_bits, replicas, name=f"tmr-N{width}")


def build_single_adder(width: int, low_bits: int = 0) -> RedundantCircuit:
    return build_single(build_cla(width), low_bits, name=f"single-N{width}")


def build_single_imprecise(spec: AdderSpec) -> RedundantCircuit:
    return build_single(build_imprecise_adder(spec), spec.L, name=f"imprecise-N{spec.N}-L{spec.L}")


def build_mvrpr(width: int, replicas: int = 3) -> RedundantCircuit:
    """Lower half: one unprotected accurate slice (``lsp``).  Upper half: voted replicas
    fed by the lower slice's carry-out."""
    if width < 4 or width % 2:
        raise ValueError(f"MVRPR width must be even and >= 4, got {width}")
    _check_replicas(replicas)
    h = width // 2
    b = NetlistBuilder()
    A = b.input("A", width)
    B = b.input("B", width)
    with b.region("lsp"):
        lower = _emit_cla(b, A[:h], B[:h], None)
    cout = lower[h]
    replicas_map, outs = {}, {}
    for i in range(1, replicas + 1):
        label = f"u{i}"
        with b.region(f"{label}.sig"):
            outs[label] = _emit_cla(b, A[h:], B[h:], cout)
        replicas_map[label] = (f"{label}.sig",)
    with b.region("voter1"):
        high = [_emit_majority(b, [o[i] for o in outs.values()]) for i in range(h + 1)]
    b.output("V2", lower[:h])
    b.output("V1", high)
    return RedundantCircuit(b.build(), Scheme.MVRPR, f"mvrpr-N{width}", replicas_map, outs,
                            ("voter1",), ("lsp",), "V2", "V1", {"N": width, "replicas": replicas})
