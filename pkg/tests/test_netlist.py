import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facsim.generators import build_cla, build_tmr_adder
from facsim.netlist import (
    Fault, FaultKind, Gate, GateKind, Netlist, NetlistError, PackedSimulation, depth, evaluate,
    evaluate_with_fault, evaluate_words, from_text, gate_count, pack_lanes, simulate, to_text,
    unpack_lanes, validate,
)
from helpers import chain, half_adder

DATA = Path(__file__).parent / "data"


def test_half_adder_truth_table():
    nl = half_adder()
    assert validate(nl) is None
    for a, b in itertools.product((0, 1), repeat=2):
        out = evaluate(nl, {"A": [a], "B": [b]})
        assert out == {"S": [a ^ b], "C": [a & b]}


def test_gate_functions():
    for kind, fn in [(GateKind.AND, lambda a, b: a & b), (GateKind.OR, lambda a, b: a | b),
                     (GateKind.XOR, lambda a, b: a ^ b), (GateKind.NAND, lambda a, b: 1 - (a & b)),
                     (GateKind.NOR, lambda a, b: 1 - (a | b))]:
        nl = Netlist(3, [Gate(kind, 2, (0, 1))], {"A": [0], "B": [1]}, {"Y": [2]}, {2: "r"})
        for a, b in itertools.product((0, 1), repeat=2):
            assert evaluate(nl, {"A": [a], "B": [b]})["Y"] == [fn(a, b)]
    nl = Netlist(4, [Gate(GateKind.NOT, 1, (0,)), Gate(GateKind.TIE0, 2, ()), Gate(GateKind.TIE1, 3, ())],
                 {"A": [0]}, {"Y": [1, 2, 3]}, {1: "r", 2: "r", 3: "r"})
    assert evaluate(nl, {"A": [0]})["Y"] == [1, 0, 1]
    assert evaluate(nl, {"A": [1]})["Y"] == [0, 0, 1]


@pytest.mark.parametrize("mutate, rule", [
    (lambda nl: nl.gates.append(Gate(GateKind.AND, 3, (0, 1))), "multiple-drivers"),
    (lambda nl: nl.gates.__setitem__(0, Gate(GateKind.XOR, 2, (0,))), "arity"),
    (lambda nl: nl.gates.__setitem__(0, Gate(GateKind.XOR, 2, (0, 9))), "net-range"),
    (lambda nl: nl.gates.append(Gate(GateKind.NOT, 0, (1,))), "driven-input"),
    (lambda nl: setattr(nl, "num_nets", 5), "undriven"),
    (lambda nl: nl.regions.pop(3), "untagged"),
    (lambda nl: nl.regions.__setitem__(0, "core"), "tagged-input"),
    (lambda nl: nl.inputs.__setitem__("B", [0]), "port-conflict"),
])
def test_validate_rules(mutate, rule):
    nl = half_adder()
    mutate(nl)
    diag = validate(nl)
    assert diag is not None and diag.rule == rule


def test_cycle_names_a_net_on_the_cycle():
    # 2 = AND(0, 3), 3 = NOT(2), 4 = NOT(3): the cycle is {2, 3}; 4 hangs off it
    nl = Netlist(5, [Gate(GateKind.AND, 2, (0, 3)), Gate(GateKind.NOT, 3, (2,)), Gate(GateKind.NOT, 4, (3,))],
                 {"A": [0], "B": [1]}, {"Y": [4]}, {2: "r", 3: "r", 4: "r"})
    diag = validate(nl)
    assert diag.rule == "cycle" and diag.net in (2, 3)
    with pytest.raises(NetlistError):
        evaluate(nl, {"A": [0], "B": [0]})


def test_evaluate_rejects_bad_assignments():
    nl = half_adder()
    with pytest.raises(ValueError):
        evaluate(nl, {"A": [1]})
    with pytest.raises(ValueError):
        evaluate(nl, {"A": [1], "B": [0], "Z": [1]})
    with pytest.raises(ValueError):
        evaluate(nl, {"A": [1, 0], "B": [0]})


def test_stuck_at_examples():
    nl = half_adder()
    assert evaluate_with_fault(nl, {"A": [1], "B": [1]}, Fault(2, FaultKind.STUCK_AT_1)) == {"S": [1], "C": [1]}
    assert evaluate_with_fault(nl, {"A": [1], "B": [1]}, Fault(0, FaultKind.STUCK_AT_0)) == {"S": [1], "C": [0]}
    assert evaluate_with_fault(nl, {"A": [0], "B": [0]}, Fault(3, FaultKind.BIT_FLIP)) == {"S": [0], "C": [1]}
    with pytest.raises(ValueError):
        evaluate_with_fault(nl, {"A": [0], "B": [0]}, Fault(7, FaultKind.STUCK_AT_0))
    with pytest.raises(ValueError):
        evaluate_with_fault(nl, {"A": [0], "B": [0]}, Fault(2, FaultKind.STUCK_AT_0, region="elsewhere"))


def test_depth_and_gate_count():
    assert depth(half_adder()) == 1
    assert depth(chain(7)) == 7
    assert gate_count(chain(7)) == 7
    assert gate_count(half_adder(), {GateKind.XOR: 2.5}) == 3.5
    tie = Netlist(2, [Gate(GateKind.TIE1, 1, ())], {"A": [0]}, {"Y": [1]}, {1: "r"})
    assert depth(tie) == 0 and gate_count(tie) == 0
    with pytest.raises(ValueError):
        gate_count(half_adder(), {GateKind.AND: -1})


def test_text_round_trip_golden():
    nl = half_adder()
    text = to_text(nl, comments=["half adder"])
    assert text == (DATA / "half_adder.net").read_text()
    back = from_text(text)
    assert back == nl
    big = build_tmr_adder(6, 2).netlist
    assert from_text(to_text(big)) == big


def test_from_text_errors():
    with pytest.raises(ValueError, match="header"):
        from_text("input A 0\n")
    with pytest.raises(ValueError, match="line 2"):
        from_text("netlist 2\nFROB 1 0\n")


def test_pack_unpack_round_trip():
    rng = np.random.default_rng(1)
    vals = rng.integers(0, 1 << 40, size=200, dtype=np.uint64)
    assert np.array_equal(unpack_lanes(pack_lanes(vals, 40), 200), vals)


def test_simulate_matches_scalar_evaluation():
    nl = build_cla(5)
    a = np.arange(32, dtype=np.uint64).repeat(32)
    b = np.tile(np.arange(32, dtype=np.uint64), 32)
    out = simulate(nl, {"A": a, "B": b})["SUM"]
    assert np.array_equal(out, a + b)
    f = Fault(nl.outputs["SUM"][2], FaultKind.STUCK_AT_1)
    faulty = simulate(nl, {"A": a, "B": b}, f)["SUM"]
    for i in range(0, 1024, 37):
        assert faulty[i] == evaluate_words(nl, f, A=int(a[i]), B=int(b[i]))["SUM"]


CLA4 = build_cla(4)
VALS = st.integers(0, 15)


@settings(max_examples=60, deadline=None)
@given(a=VALS, b=VALS, net=st.integers(0, CLA4.num_nets - 1), kind=st.sampled_from(list(FaultKind)))
def test_fault_outside_fanout_cone_changes_nothing(a, b, net, kind):
    """A fault can only change nets it reaches."""
    prog = CLA4.program
    cone = {int(CLA4.gates[prog.order[p]].output) for p in prog.cone(net)} | {net}
    sim = PackedSimulation(CLA4, {"A": np.array([a], dtype=np.uint64), "B": np.array([b], dtype=np.uint64)})
    vals = sim.with_fault(Fault(net, kind))
    changed = set(np.nonzero(vals[:, 0] != sim.golden[:, 0])[0].tolist())
    assert changed <= cone


@settings(max_examples=60, deadline=None)
@given(a=VALS, b=VALS, net=st.integers(0, CLA4.num_nets - 1))
def test_flip_equals_stuck_at_opposite_value(a, b, net):
    """Flipping a net gives the same outputs as sticking it at the complement of its golden value."""
    ports = {"A": a, "B": b}
    sim = PackedSimulation(CLA4, {k: np.array([v], dtype=np.uint64) for k, v in ports.items()})
    golden_bit = int(sim.golden[net, 0] & np.uint64(1))
    stuck = FaultKind.STUCK_AT_0 if golden_bit else FaultKind.STUCK_AT_1
    same = FaultKind.STUCK_AT_1 if golden_bit else FaultKind.STUCK_AT_0
    flip = evaluate_words(CLA4, Fault(net, FaultKind.BIT_FLIP), **ports)
    assert flip == evaluate_words(CLA4, Fault(net, stuck), **ports)
    assert evaluate_words(CLA4, Fault(net, same), **ports) == evaluate_words(CLA4, **ports)


@settings(max_examples=30, deadline=None)
@given(a=VALS, b=VALS, net=st.integers(0, CLA4.num_nets - 1), kind=st.sampled_from(list(FaultKind)))
def test_packed_fault_matches_scalar(a, b, net, kind):
    sim = PackedSimulation(CLA4, {"A": np.array([a], dtype=np.uint64), "B": np.array([b], dtype=np.uint64)})
    packed = int(sim.outputs(sim.with_fault(Fault(net, kind)))["SUM"][0])
    assert packed == evaluate_words(CLA4, Fault(net, kind), A=a, B=b)["SUM"]
    again = int(sim.outputs(sim.with_fault(Fault(net, kind)))["SUM"][0])
    assert again == packed
