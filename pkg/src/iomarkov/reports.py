"""JSON analysis reports plus the DOT and CSV exports behind the CLI."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Literal, Optional, Sequence

import numpy as np

from . import __version__
from .absorbing_chain import analyze_chain, extreme_effects
from .benchmark_stats import CorrelationMatrix, PanelRow
from .dominance_spectral import DEFAULT_BAND, spectral_summary
from .graph_topology import (
    Digraph,
    adjacency_from_matrix,
    essential_flows,
    fair_threshold,
    strong_components,
)
from .io_table import AugmentedChain, FlowTable, augment, coefficients

SelfLoops = Literal["none", "poles", "all"]


def jsonable(v: Any) -> Any:
    """Replace NaN with ``None`` and infinities with ``\"inf\"``/``\"-inf\"`` tokens."""
    if isinstance(v, float):
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
    if isinstance(v, dict):
        return {k: jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return v


def _decode_number(v: Any) -> Optional[float]:
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    return v


def _num(x) -> Optional[float]:
    x = float(x)
    return None if math.isnan(x) else x


@dataclass
class AnalysisReport:
    metadata: dict
    spectral: dict
    times: list = field(default_factory=list)
    sensitivity_extremes: dict = field(default_factory=dict)
    components: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(jsonable(asdict(self)), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        raw = json.loads(text)
        spectral = {k: _decode_number(v) for k, v in raw["spectral"].items()}
        if spectral.get("nodes") is not None:
            spectral["nodes"] = [_decode_number(v) for v in spectral["nodes"]]
        times = [{k: _decode_number(v) for k, v in row.items()} for row in raw["times"]]
        return cls(raw["metadata"], spectral, times, raw["sensitivity_extremes"],
                   raw["components"], raw["diagnostics"])


def _component_listing(chain: AugmentedChain, threshold: float) -> dict:
    g = adjacency_from_matrix(chain.transition, chain.labels)
    web = strong_components(g).labelled(chain.labels)
    essential = strong_components(essential_flows(g, threshold)).labelled(chain.labels)
    return {"strong": web, "essential": [c for c in essential if len(c) > 1], "threshold": threshold}


def build_report(table: FlowTable, *, source: str = "", k: int = 5, band: float = DEFAULT_BAND,
                 threshold: Optional[float] = None) -> AnalysisReport:
    coeffs = coefficients(table)
    analysis = analyze_chain(coeffs)
    summ = spectral_summary(coeffs, band)
    chains = {o: augment(coeffs, o) for o in ("indirect", "direct")}
    thr = fair_threshold(table.n + 1) if threshold is None else threshold

    def effects(largest):
        return [list(e) for e in extreme_effects(analysis, "output_wrt_final_demand", k, largest)]

    return AnalysisReport(
        metadata={"source": source, "poles": table.n, "orientations": ["indirect", "direct"],
                  "version": __version__},
        spectral={"lambda_star": summ.lambda_star, "gap": summ.gap, "t_rel": summ.t_rel,
                  "nodes": list(summ.nodes), "f_value": summ.f_value, "structure": summ.structure},
        times=[{"pole": p, "t": float(analysis.t[i]), "t_upper": float(analysis.t_upper[i]),
                "t_lower": float(analysis.t_lower[i]), "dt": _num(analysis.dt_ratio[i])}
               for i, p in enumerate(table.poles)],
        sensitivity_extremes={"kind": "output_wrt_final_demand", "columns": ["value", "origin", "target"],
                              "top": effects(True), "bottom": effects(False)},
        components={o: _component_listing(c, thr) for o, c in chains.items()},
        diagnostics=list(table.diagnostics),
    )


def _quote(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: Digraph, name: str = "web", self_loops: SelfLoops = "poles",
           absorbing: Sequence[int] = ()) -> str:
    """DOT source with one node per vertex and one weighted edge per arc.

    ``self_loops="poles"`` keeps self-loops of ordinary states but drops the
    trivial loop on absorbing states; ``"none"`` drops all, ``"all"`` keeps all.
    """
    lines = [f"digraph {_quote(name)} {{"]
    for label in g.labels:
        lines.append(f"  {_quote(label)};")
    for i, j in g.arcs():
        if i == j and (self_loops == "none" or (self_loops == "poles" and i in absorbing)):
            continue
        w = float(g.weights[i, j]) if g.weights is not None else 1.0
        lines.append(f"  {_quote(g.labels[i])} -> {_quote(g.labels[j])} [label=\"{w:.6f}\", weight={w!r}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def chain_web(chain: AugmentedChain, threshold: Optional[float] = None) -> Digraph:
    g = adjacency_from_matrix(chain.transition, chain.labels)
    return g if threshold is None else essential_flows(g, threshold)


def panel_row(country: str, growth_rate: float, table: FlowTable) -> PanelRow:
    coeffs = coefficients(table)
    summ = spectral_summary(coeffs)
    analysis = analyze_chain(coeffs)
    hi, lo = int(np.argmax(analysis.t)), int(np.argmin(analysis.t))
    return PanelRow(
        country=country, growth_rate=growth_rate, lambda_star=summ.lambda_star, t_rel=summ.t_rel,
        node_max=summ.nodes[2], node_mean=summ.nodes[1], node_min=summ.nodes[0],
        f_value=math.nan if summ.f_value is None else summ.f_value,
        max_t=float(analysis.t[hi]), argmax_t=table.poles[hi],
        min_t=float(analysis.t[lo]), argmin_t=table.poles[lo],
    )


def read_panel_spec(path) -> list[tuple[str, float, Path]]:
    """``country,growth_rate,table_path`` rows; table paths resolve against the panel file's folder."""
    base = Path(path).parent
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            out.append((rec["country"].strip(), float(rec["growth_rate"].replace(",", ".")),
                        base / rec["table_path"].strip()))
    return out


def correlation_csv(m: CorrelationMatrix) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["field_a", "field_b", "r", "p_value", "n", "exact"])
    for a in m.fields:
        for b in m.fields:
            c = m.cell(a, b)
            wr.writerow([a, b, repr(c.r), repr(c.p_value), c.n, int(c.exact)])
    return buf.getvalue()


def scatter_csv(rows: Iterable[PanelRow], fields: Sequence[str]) -> str:
    rows = list(rows)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x_field", "y_field", "x", "y", "label"])
    for i, a in enumerate(fields):
        for b in fields[i + 1 :]:
            for r in rows:
                wr.writerow([a, b, repr(getattr(r, a)), repr(getattr(r, b)), r.country])
    return buf.getvalue()
