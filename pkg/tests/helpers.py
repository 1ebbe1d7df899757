"""Small hand-built netlists shared by the tests."""

from facsim.netlist import Gate, GateKind, Netlist


def half_adder() -> Netlist:
    return Netlist(
        num_nets=4,
        gates=[Gate(GateKind.XOR, 2, (0, 1)), Gate(GateKind.AND, 3, (0, 1))],
        inputs={"A": [0], "B": [1]},
        outputs={"S": [2], "C": [3]},
        regions={2: "core", 3: "core"},
    )


def chain(n: int) -> Netlist:
    """``n`` NOT gates in series on one input."""
    gates = [Gate(GateKind.NOT, i + 1, (i,)) for i in range(n)]
    return Netlist(n + 1, gates, {"X": [0]}, {"Y": [n]}, {i + 1: "core" for i in range(n)})
