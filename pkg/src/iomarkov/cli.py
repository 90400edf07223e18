"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from pathlib import Path

from .absorbing_chain import analyze_chain
from .benchmark_stats import PanelRow, panel_correlate, read_panel_rows, write_panel_rows
from .errors import InputError, NumericalError
from .graph_topology import fair_threshold
from .io_table import augment, coefficients, parse_flow_table
from .reports import (
    build_report,
    chain_web,
    jsonable,
    correlation_csv,
    panel_row,
    read_panel_spec,
    scatter_csv,
    to_dot,
)
from .simulation import DEFAULT_STEP_CAP, compare, simulate

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("iomarkov")


def _emit(text: str, dest) -> None:
    if dest is None or str(dest) == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _read(args):
    return parse_flow_table(args.input, transpose=args.transpose, drop_zero_output=args.drop_zero_output)


def cmd_analyze(args) -> int:
    table = _read(args)
    threshold = None if args.threshold == "fair" else float(args.threshold)
    report = build_report(table, source=str(args.input), k=args.top, band=args.band, threshold=threshold)
    _emit(report.to_json(), args.output)
    return EXIT_OK


def cmd_graph(args) -> int:
    table = _read(args)
    chain = augment(coefficients(table), args.orientation)
    threshold = fair_threshold(chain.n + 1) if args.threshold == "fair" else float(args.threshold)
    web = chain_web(chain, threshold)
    dot = to_dot(web, name=f"{args.orientation} web", self_loops=args.self_loops,
                 absorbing=[chain.absorbing_index])
    _emit(dot, args.dot)
    return EXIT_OK


def cmd_simulate(args) -> int:
    table = _read(args)
    coeffs = coefficients(table)
    chain = augment(coeffs, args.orientation)
    if args.start not in chain.labels:
        raise InputError(f"unknown start state {args.start!r}")
    start = chain.labels.index(args.start)
    stats = simulate(chain, start, n_walks=args.walks, seed=args.seed, step_cap=args.step_cap,
                     partitions=args.partitions)
    report = compare(stats, analyze_chain(coeffs))
    payload = {
        "start": args.start,
        "orientation": args.orientation,
        "n_walks": stats.n_walks,
        "seed": stats.seed,
        "partitions": stats.partitions,
        "censored": stats.censored,
        "warning": stats.warning,
        "mean_steps": stats.mean_steps,
        "stderr_steps": stats.stderr_steps,
        "mean_visits": {chain.labels[k]: v for k, v in zip(stats.transient_states, stats.mean_visits.tolist())},
        "stderr_visits": {chain.labels[k]: v for k, v in zip(stats.transient_states, stats.stderr_visits.tolist())},
        "comparison": [
            {"quantity": e.quantity, "empirical": e.empirical, "analytic": e.analytic,
             "stderr": e.stderr, "z": e.z, "flagged": abs(e.z) > 3}
            for e in report.entries
        ],
        "certified": report.certified,
        "ok": report.ok,
    }
    text = json.dumps(jsonable(payload), indent=2, allow_nan=False) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    failures = 0
    rows: dict[str, PanelRow] = {}
    if args.panel:
        for country, growth, path in read_panel_spec(args.panel):
            try:
                rows[country] = panel_row(country, growth, parse_flow_table(path))
            except (InputError, NumericalError, OSError) as exc:
                failures += 1
                print(f"iomarkov bench: {country}: {exc}", file=sys.stderr)
    if args.summary_override:
        for row in read_panel_rows(args.summary_override):
            rows[row.country] = row
    if not rows and not failures:
        raise InputError("bench needs a panel file or --summary-override")
    ordered = list(rows.values())
    fields = tuple(args.fields.split(","))
    exclude = [c for c in (args.exclude or "").split(",") if c]

    out = Path(args.out) if args.out else None
    summary = io.StringIO()
    write_panel_rows(ordered, summary)
    _emit(summary.getvalue(), out)
    try:
        matrix = panel_correlate(ordered, fields, exclude)
    except InputError as exc:
        print(f"iomarkov bench: correlation: {exc}", file=sys.stderr)
        return EXIT_INPUT
    kept = [r for r in ordered if r.country not in set(exclude)]
    if out is None:
        sys.stdout.write("\n" + correlation_csv(matrix))
    else:
        out.with_name(out.stem + "_correlation.csv").write_text(correlation_csv(matrix), encoding="utf-8")
        out.with_name(out.stem + "_scatter.csv").write_text(scatter_csv(kept, fields), encoding="utf-8")
    return EXIT_INPUT if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iomarkov", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def table_args(sp):
        sp.add_argument("input", help="flow-table CSV")
        sp.add_argument("--transpose", action="store_true", help="input is user-row/supplier-column")
        sp.add_argument("--drop-zero-output", action="store_true", help="drop poles with zero output")

    a = sub.add_parser("analyze", help="full analysis report as JSON")
    table_args(a)
    a.add_argument("-o", "--output", help="report path (default stdout)")
    a.add_argument("--top", type=int, default=5, help="extreme sensitivities to list")
    a.add_argument("--band", type=float, default=0.01, help="fair-division band around f = 1/2")
    a.add_argument("--threshold", default="fair", help="essential-flow threshold: 'fair' or a number")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("graph", help="flow web as DOT")
    table_args(g)
    g.add_argument("--orientation", choices=["direct", "indirect"], default="indirect")
    g.add_argument("--threshold", default="fair", help="'fair' (1/(n+1)) or a number in (0, 1]")
    g.add_argument("--self-loops", choices=["none", "poles", "all"], default="poles",
                   help="'poles' drops only the absorbing state's loop")
    g.add_argument("--dot", help="output path (default stdout)")
    g.set_defaults(func=cmd_graph)

    s = sub.add_parser("simulate", help="Monte-Carlo check of absorption times and visits")
    table_args(s)
    s.add_argument("--start", required=True, help="start pole code")
    s.add_argument("--walks", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--step-cap", type=int, default=DEFAULT_STEP_CAP)
    s.add_argument("--partitions", type=int, default=4)
    s.add_argument("--orientation", choices=["direct", "indirect"], default="indirect")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="cross-country panel and correlations")
    b.add_argument("panel", nargs="?", help="CSV with country,growth_rate,table_path")
    b.add_argument("--summary-override", help="CSV of precomputed panel rows")
    b.add_argument("--exclude", help="comma-separated country codes to leave out")
    b.add_argument("--fields", default="growth_rate,lambda_star,max_t")
    b.add_argument("--out", help="summary CSV path; correlation and scatter CSVs are written beside it")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"iomarkov: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"iomarkov: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InputError as exc:
        print(f"iomarkov: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
