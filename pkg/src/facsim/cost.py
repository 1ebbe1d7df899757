"""Proxy design metrics: weighted gate count (area) and unit-delay depth (delay).

No power proxy is reported; there is no switching-activity model behind these numbers.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

from facsim.generators import RedundantCircuit
from facsim.netlist import GateKind, depth, gate_count


@dataclass(frozen=True)
class CostReport:
    scheme: str
    circuit: str
    gate_count: float
    depth: int
    gate_ratio: float
    depth_ratio: float


def load_weights(path: str | Path) -> dict[GateKind, float]:
    """JSON object mapping gate kind names (``"AND"``, ``"TIE1"``, ...) to weights."""
    raw = json.loads(Path(path).read_text())
    return {GateKind[k.upper()]: float(v) for k, v in raw.items()}


def cost_report(circuits: Sequence[RedundantCircuit], baseline: str,
                weights: Mapping[GateKind, float] | None = None) -> list[CostReport]:
    """Metrics per circuit plus ratios against the circuit whose scheme (or name) is ``baseline``."""
    metrics = [(c, gate_count(c.netlist, weights), depth(c.netlist)) for c in circuits]
    base = next((m for m in metrics if baseline in (m[0].scheme.value, m[0].name)), None)
    if base is None:
        raise ValueError(f"baseline {baseline!r} not among {[c.name for c in circuits]}")
    _, base_gates, base_depth = base
    return [
        CostReport(c.scheme.value, c.name, g, d,
                   g / base_gates if base_gates else float("nan"),
                   d / base_depth if base_depth else float("nan"))
        for c, g, d in metrics
    ]


def to_csv(reports: Sequence[CostReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scheme", "circuit", "gate_count", "depth", "gate_ratio", "depth_ratio"])
    for r in reports:
        w.writerow([r.scheme, r.circuit, r.gate_count, r.depth, f"{r.gate_ratio:.6f}", f"{r.depth_ratio:.6f}"])
    return buf.getvalue()


def to_json(reports: Sequence[CostReport], baseline: str) -> str:
    doc = {"baseline": baseline, "area_proxy": "weighted gate count", "delay_proxy": "gate levels",
           "power": "not modelled", "rows": [asdict(r) for r in reports]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
