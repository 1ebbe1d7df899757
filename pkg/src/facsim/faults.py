"""Fault enumeration and campaigns over redundant circuits."""

from __future__ import annotations

import csv
import enum
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from facsim.generators import RedundantCircuit
from facsim.netlist import Fault, FaultKind, Netlist, PackedSimulation

EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class Exhaustive:
    """Every combination of the circuit's input bits (at most 20 bits in total)."""

    def describe(self) -> dict:
        return {"mode": "exhaustive"}


@dataclass(frozen=True)
class Sampled:
    n: int
    seed: int

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("sample size must be positive")
        if self.seed is None:
            raise ValueError("sampled inputs need a seed")

    def describe(self) -> dict:
        return {"mode": "sampled", "seed": self.seed}


def input_vectors(netlist: Netlist, inputs: Exhaustive | Sampled) -> dict[str, np.ndarray]:
    """Integer operand arrays per input port.  Exhaustive mode counts through all
    inputs with the first declared port in the low bits."""
    if isinstance(inputs, Exhaustive):
        total = netlist.input_width()
        if total > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive inputs limited to {EXHAUSTIVE_LIMIT} bits, circuit has {total}")
        counter = np.arange(1 << total, dtype=np.uint64)
        out, shift = {}, 0
        for name, nets in netlist.inputs.items():
            out[name] = (counter >> np.uint64(shift)) & np.uint64((1 << len(nets)) - 1)
            shift += len(nets)
        return out
    rng = np.random.default_rng(inputs.seed)
    return {name: rng.integers(0, 1 << len(nets), size=inputs.n, dtype=np.uint64)
            for name, nets in netlist.inputs.items()}


def resolve_scope(circuit: RedundantCircuit, scope: Iterable[str] | None) -> list[str]:
    """Expand replica labels to their regions.  ``None`` means every non-voter region."""
    if scope is None:
        return sorted(set(circuit.replica_regions) | set(circuit.unprotected))
    present = set(circuit.netlist.regions.values())
    regions: set[str] = set()
    for token in scope:
        if token in circuit.replicas:
            regions.update(circuit.replicas[token])
        elif token == "voters":
            regions.update(circuit.voter_regions)
        elif token in present:
            regions.add(token)
        else:
            raise ValueError(f"unknown region or replica {token!r}")
    return sorted(regions)


def enumerate_faults(circuit: RedundantCircuit, scope: Iterable[str] | None = None,
                     kinds: Sequence[FaultKind] = (FaultKind.STUCK_AT_0, FaultKind.STUCK_AT_1)) -> list[Fault]:
    """One fault per kind on every net tagged with a scoped region, ordered by net."""
    regions = resolve_scope(circuit, scope)
    tags = circuit.netlist.regions
    return [Fault(net, kind, tags[net]) for net in circuit.netlist.nets_in(regions) for kind in kinds]


@dataclass(frozen=True)
class FaultOutcome:
    faults: tuple[Fault, ...]
    masked: bool
    worst_error: int
    failing_vectors: int

    def row(self) -> dict:
        return {
            "fault": "+".join(str(f) for f in self.faults),
            "nets": " ".join(str(f.net) for f in self.faults),
            "kind": " ".join(f.kind.value for f in self.faults),
            "region": " ".join(f.region or "" for f in self.faults),
            "masked": int(self.masked),
            "worst_error": self.worst_error,
            "failing_vectors": self.failing_vectors,
        }


@dataclass
class FaultCampaignReport:
    scheme: str
    circuit: str
    scope: list[str]
    coverage: dict
    outcomes: list[FaultOutcome] = field(default_factory=list)

    @property
    def faults_total(self) -> int:
        return len(self.outcomes)

    @property
    def faults_masked(self) -> int:
        return sum(o.masked for o in self.outcomes)

    @property
    def faults_propagated(self) -> int:
        return self.faults_total - self.faults_masked

    @property
    def single_fault(self) -> bool:
        """False when any run injected several faults at once (no masking guarantee applies)."""
        return all(len(o.faults) == 1 for o in self.outcomes)

    @property
    def worst_error(self) -> int:
        return max((o.worst_error for o in self.outcomes), default=0)

    def summary(self) -> dict:
        return {
            "scheme": self.scheme,
            "circuit": self.circuit,
            "scope": self.scope,
            "coverage": self.coverage,
            "faults_total": self.faults_total,
            "faults_masked": self.faults_masked,
            "faults_propagated": self.faults_propagated,
            "worst_error": self.worst_error,
            "single_fault_guarantee_applies": self.single_fault,
        }

    def to_json(self) -> str:
        doc = self.summary()
        doc["faults"] = [o.row() for o in self.outcomes]
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["fault", "nets", "kind", "region", "masked", "worst_error", "failing_vectors"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for o in self.outcomes:
            w.writerow(o.row())
        return buf.getvalue()


def _judge(sim: PackedSimulation, faults: tuple[Fault, ...], golden_word) -> FaultOutcome:
    vals = sim.with_faults(faults)
    mm = sim.mismatch_lanes(vals)
    if not mm.any():
        return FaultOutcome(faults, True, 0, 0)
    failing = int(sum(bin(int(x)).count("1") for x in mm))
    word = sim.output_word(vals)
    bad = word != golden_word
    diff = np.abs(word[bad].astype(object) - golden_word[bad].astype(object))
    return FaultOutcome(faults, False, int(diff.max()), failing)


def run_campaign(circuit: RedundantCircuit, faults: Sequence[Fault | Sequence[Fault]],
                 inputs: Exhaustive | Sampled = Exhaustive(), jobs: int = 1,
                 scope: Iterable[str] | None = None) -> FaultCampaignReport:
    """Classify each fault (or simultaneous fault set) as masked or propagated.

    A fault is masked iff every tested vector yields the fault-free outputs.
    The error magnitude reads all outputs, low port first, as one unsigned integer.
    """
    sets = [(f,) if isinstance(f, Fault) else tuple(f) for f in faults]
    vectors = input_vectors(circuit.netlist, inputs)
    sim = PackedSimulation(circuit.netlist, vectors)
    golden = sim.output_word()
    coverage = dict(inputs.describe(), vectors=sim.n)
    if jobs <= 1 or len(sets) < 2:
        outcomes = [_judge(sim, s, golden) for s in sets]
    else:
        chunks = [sets[i::jobs] for i in range(jobs)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda c: [_judge(sim, s, golden) for s in c], chunks))
        # undo the round-robin split so the order never depends on ``jobs``
        outcomes = [None] * len(sets)
        for i, part in enumerate(parts):
            outcomes[i::jobs] = part
    scope_list = sorted({f.region or "" for s in sets for f in s}) if scope is None else resolve_scope(circuit, scope)
    return FaultCampaignReport(circuit.scheme.value, circuit.name, scope_list, coverage, outcomes)


class UnitOutcome(enum.Enum):
    MASKED = "masked"
    EXPOSED = "exposed"


def faulty_unit_test(circuit: RedundantCircuit, replica: str, inputs: Exhaustive | Sampled = Exhaustive()) -> UnitOutcome:
    """Invert every output bit of one replica ahead of the voters, for every vector."""
    if replica not in circuit.replica_outputs:
        raise ValueError(f"unknown replica {replica!r}; have {sorted(circuit.replica_outputs)}")
    from facsim import _backend

    nl = circuit.netlist
    sim = PackedSimulation(nl, input_vectors(nl, inputs))
    prog = sim.prog
    vals = sim.golden.copy()
    nets = sorted(set(circuit.replica_outputs[replica]))
    vals[nets] = ~sim.golden[nets]
    voter_nets = nl.nets_in(circuit.voter_regions)
    seq = np.sort(prog.position[voter_nets]).astype(np.int32)
    _backend.run_gates(prog.ops, prog.in0, prog.in1, prog.outs, seq, vals, np.zeros(nl.num_nets, dtype=np.uint8))
    return UnitOutcome.EXPOSED if sim.mismatch_lanes(vals).any() else UnitOutcome.MASKED
