import json
import re

import numpy as np
import pytest

from conftest import morocco_like_table
from iomarkov import __version__
from iomarkov.cli import main
from iomarkov.dominance_spectral import structure_matrix
from iomarkov.graph_topology import adjacency_from_matrix, essential_flows
from iomarkov.io_table import (
    augment,
    coefficients,
    format_flow_table,
    parse_flow_table,
    table_from_trade_matrix,
)
from iomarkov.reports import AnalysisReport, build_report, chain_web, to_dot

NODE = re.compile(r'^  "(?:[^"\\]|\\.)*";$')
EDGE = re.compile(r'^  "(?:[^"\\]|\\.)*" -> "(?:[^"\\]|\\.)*" \[label="\d+\.\d{6}", weight=[0-9.e+-]+\];$')


def check_dot(text):
    """Line-level grammar for the DOT subset we emit; returns (nodes, edges)."""
    lines = text.rstrip("\n").split("\n")
    assert re.match(r'^digraph "(?:[^"\\]|\\.)*" \{$', lines[0])
    assert lines[-1] == "}"
    nodes = [ln for ln in lines[1:-1] if NODE.match(ln)]
    edges = [ln for ln in lines[1:-1] if EDGE.match(ln)]
    assert len(nodes) + len(edges) == len(lines) - 2, "unrecognised DOT line"
    return nodes, edges


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_table(path, text):
    path.write_text(text)
    return path


# ---- report --------------------------------------------------------------

def test_golden_report(two_pole, data_dir):
    report = build_report(two_pole, source="two_pole.csv")
    got = json.loads(report.to_json())
    assert got["metadata"]["version"] == __version__
    got["metadata"]["version"] = "<masked>"
    assert json.dumps(got, indent=2) + "\n" == (data_dir / "two_pole_report.json").read_text()


def test_report_round_trip_and_tokens(two_pole):
    report = build_report(two_pole, source="x")
    text = report.to_json()
    assert "NaN" not in text and "Infinity" not in text
    assert AnalysisReport.from_json(text) == report


def test_infinite_bound_serialises_as_token(tmp_path):
    # y_B = 0, so every upper bound is infinite and the duration ratio undefined
    src = write_table(tmp_path / "t.csv", "pole,A,B,Y\nA,0.2,0.3,0.5\nB,0.5,0.2,0\n")
    report = build_report(parse_flow_table(src))
    text = report.to_json()
    assert '"t_upper": "inf"' in text and '"dt": null' in text
    again = AnalysisReport.from_json(text)
    assert again.times[0]["t_upper"] == float("inf")
    assert again == report


def test_report_values(two_pole):
    report = build_report(two_pole)
    assert report.spectral["lambda_star"] == pytest.approx(0.5)
    assert [row["t"] for row in report.times] == pytest.approx([2.0, 2.0])
    assert report.components["indirect"]["strong"] == [["P1", "P2"], ["FE"]]


# ---- DOT -----------------------------------------------------------------

def test_two_pole_fair_web(two_pole):
    chain = augment(coefficients(two_pole))
    dot = to_dot(chain_web(chain, 1 / 3), absorbing=[chain.absorbing_index])
    nodes, edges = check_dot(dot)
    assert len(nodes) == 3
    weights = sorted(float(re.search(r'label="([^"]+)"', e).group(1)) for e in edges)
    assert weights == [0.4, 0.4, 0.5, 0.5]


def test_dot_edge_count_matches_filtered_arcs():
    chain = augment(coefficients(morocco_like_table()))
    web = essential_flows(adjacency_from_matrix(chain.transition, chain.labels), 0.02)
    for mode in ("all", "none", "poles"):
        _, edges = check_dot(to_dot(web, self_loops=mode, absorbing=[36]))
        loops = sum(1 for i, j in web.arcs() if i == j)
        expected = {"all": len(web.arcs()), "none": len(web.arcs()) - loops,
                    "poles": len(web.arcs()) - int(web.adjacency[36, 36])}[mode]
        assert len(edges) == expected
    dot = to_dot(web, absorbing=[36])
    assert not re.search(r'"FE" ->', dot) and '-> "FE"' in dot


def test_dot_quotes_labels():
    g = adjacency_from_matrix(np.array([[0.0, 0.5], [0.0, 0.0]]), ['a"b', "c\\d"])
    nodes, edges = check_dot(to_dot(g))
    assert len(nodes) == 2 and len(edges) == 1


# ---- CLI -----------------------------------------------------------------

def test_cli_analyze(capsys, data_dir, tmp_path):
    code, out, _ = run(capsys, "analyze", data_dir / "two_pole.csv")
    assert code == 0
    report = json.loads(out)
    assert report["spectral"]["lambda_star"] == pytest.approx(0.5)
    assert [r["t"] for r in report["times"]] == pytest.approx([2.0, 2.0])
    dest = tmp_path / "r.json"
    assert run(capsys, "analyze", data_dir / "two_pole.csv", "-o", dest)[0] == 0
    assert json.loads(dest.read_text()) == report


def test_cli_exit_codes(capsys, tmp_path):
    assert run(capsys, "analyze", tmp_path / "missing.csv")[0] == 2
    bad = write_table(tmp_path / "bad.csv", "pole,P1,P2,Y\nP1,0.1,x,0.5\nP2,0.2,0.8,1.0\n")
    code, _, err = run(capsys, "analyze", bad)
    assert code == 1 and "ParseError" in err
    neg = write_table(tmp_path / "neg.csv", "pole,P1,P2,Y\nP1,0.1,0.4,-0.5\nP2,0.2,0.8,1.0\n")
    assert run(capsys, "analyze", neg)[0] == 1
    utopia = write_table(tmp_path / "utopia.csv", "pole,A,B,Y\nA,0.5,0.5,0\nB,0.5,0.5,0\n")
    code, _, err = run(capsys, "analyze", utopia)
    assert code == 3 and "NonProductive" in err
    zero = write_table(tmp_path / "zero.csv", "pole,A,B,Y\nA,1,0,2\nB,0,0,0\n")
    assert run(capsys, "analyze", zero)[0] == 1
    assert run(capsys, "analyze", zero, "--drop-zero-output")[0] == 0


def test_cli_graph(capsys, data_dir):
    code, out, _ = run(capsys, "graph", data_dir / "two_pole.csv")
    assert code == 0
    nodes, edges = check_dot(out)
    assert len(nodes) == 3 and len(edges) == 4
    code, out, _ = run(capsys, "graph", data_dir / "two_pole.csv", "--threshold", "1.0")
    assert code == 0
    nodes, edges = check_dot(out)
    assert len(nodes) == 3 and edges == []
    code, out, _ = run(capsys, "graph", data_dir / "two_pole.csv", "--orientation", "direct", "--threshold", "0.05")
    assert '"VA"' in out and '"VA" -> "VA"' not in out
    assert run(capsys, "graph", data_dir / "two_pole.csv", "--threshold", "0")[0] == 1


def test_cli_simulate(capsys, data_dir, tmp_path):
    args = ("simulate", data_dir / "two_pole.csv", "--start", "P1", "--walks", "200000", "--seed", "4")
    code, first, _ = run(capsys, *args)
    assert code == 0
    _, second, _ = run(capsys, *args)
    assert first == second
    payload = json.loads(first)
    t_entry = payload["comparison"][0]
    assert t_entry["quantity"] == "t" and abs(t_entry["z"]) <= 3
    assert payload["certified"] is True
    assert run(capsys, "simulate", data_dir / "two_pole.csv", "--start", "FE")[0] == 1
    assert run(capsys, "simulate", data_dir / "two_pole.csv", "--start", "nope")[0] == 1


def test_cli_bench_summary_override(capsys, data_dir, tmp_path):
    out = tmp_path / "summary.csv"
    code, _, _ = run(capsys, "bench", "--summary-override", data_dir / "benchmark_panel.csv",
                     "--exclude", "BRA", "--out", out)
    assert code == 0
    rows = {(r[0], r[1]): r for r in (ln.split(",") for ln in
                                      (tmp_path / "summary_correlation.csv").read_text().splitlines()[1:])}
    r, p = map(float, rows[("lambda_star", "max_t")][2:4])
    assert r == pytest.approx(0.725540, abs=1e-3) and p == pytest.approx(0.0115, abs=5e-4)
    r, p = map(float, rows[("growth_rate", "max_t")][2:4])
    assert r == pytest.approx(0.553374, abs=1e-3) and p == pytest.approx(0.0774, abs=5e-4)
    r, p = map(float, rows[("growth_rate", "lambda_star")][2:4])
    assert r == pytest.approx(0.355589, abs=1e-3) and p == pytest.approx(0.2832, abs=5e-4)
    scatter = (tmp_path / "summary_scatter.csv").read_text().splitlines()
    assert scatter[0] == "x_field,y_field,x,y,label"
    assert len(scatter) == 1 + 3 * 11
    assert len(out.read_text().splitlines()) == 13


def test_cli_bench_too_few(capsys, data_dir, tmp_path):
    single = tmp_path / "one.csv"
    lines = (data_dir / "benchmark_panel.csv").read_text().splitlines()
    single.write_text("\n".join(lines[:2]) + "\n")
    code, _, err = run(capsys, "bench", "--summary-override", single)
    assert code == 1 and "need at least 3" in err
    everyone = ",".join(ln.split(",")[0] for ln in lines[1:])
    assert run(capsys, "bench", "--summary-override", data_dir / "benchmark_panel.csv", "--exclude", everyone)[0] == 1


def test_cli_bench_from_tables(capsys, tmp_path):
    entries = []
    for k, (kind, y) in enumerate([("fair_division", [0.3, 0.5, 0.7]), ("almost_loop", [0.2, 0.6, 0.9]),
                                   ("almost_pyramidal", [0.4, 0.5, 0.8]), ("almost_loop", [0.1, 0.5, 0.5])]):
        table = table_from_trade_matrix(structure_matrix(kind, y, 0.3), np.ones(3))
        (tmp_path / f"c{k}.csv").write_text(format_flow_table(table))
        entries.append(f"C{k},{k + 1.5},c{k}.csv")
    (tmp_path / "broken.csv").write_text("pole,A,Y\nA,oops,1\n")
    entries.append("BAD,2.0,broken.csv")
    panel = tmp_path / "panel.csv"
    panel.write_text("country,growth_rate,table_path\n" + "\n".join(entries) + "\n")
    out = tmp_path / "s.csv"
    code, _, err = run(capsys, "bench", panel, "--out", out)
    assert code == 1 and "BAD" in err
    body = out.read_text().splitlines()
    assert len(body) == 5 and body[1].startswith("C0,1.5,")
    assert (tmp_path / "s_correlation.csv").exists()
