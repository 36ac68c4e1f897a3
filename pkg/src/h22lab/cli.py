"""``h22lab`` command line.

Exit status: 0 when every selected check passes, 1 when a check fails, 2 for
usage, configuration, input-file and size errors (nothing is computed then).
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .config import RunConfig, load_config
from .errors import ConfigError, H22Error, SizeError
from .graph import RootedGraph
from .graph_io import format_graph, load_graph
from .integrate import MCMC_MAX_N, QUAD_MAX_N, monotonicity_scan
from .probes import BANK_VERSION, resolve
from .reports import (
    CHECK_COLUMNS,
    CSV_VERSION,
    PLOT_COLUMNS,
    SCAN_COLUMNS,
    check_rows,
    plot_rows,
    read_scan_csv,
    scan_rows,
    write_csv,
    write_json,
)
from .suites import SYMBOLIC_SUITES, VerificationReport, run_all_suites

GRAPH_SUITES = ("matrix-tree", "partition", "reroot", "schur", "twopoint")


def _header(command: str, cfg: RunConfig, digest: str) -> dict:
    return {
        "command": command,
        "version": __version__,
        "csv-version": CSV_VERSION,
        "config": cfg.canonical(),
        "config-digest": digest,
    }


def _emit_report(command: str, cfg: RunConfig, report: VerificationReport, out: Path,
                 stem: str) -> int:
    digest = cfg.digest()
    write_csv(out / f"{stem}.csv", CHECK_COLUMNS, check_rows(report.checks, digest))
    write_json(out / f"{stem}.json", {**_header(command, cfg, digest), **report.to_json()})
    for suite, (ok, total) in sorted(report.by_suite().items()):
        print(f"{suite}: {ok}/{total} passed")
    for c in report.failures():
        print(f"FAIL {c.suite}: {c.check} (expected {c.expected}, got {c.got})", file=sys.stderr)
    print(f"report: {out / (stem + '.json')}")
    return 0 if report.passed else 1


def _select_suites(cfg: RunConfig, cli: Optional[List[str]], default: Sequence[str]):
    chosen = cli if cli else cfg.suites
    if chosen is None:
        return tuple(default)
    return tuple(chosen)


def cmd_susy_check(cfg: RunConfig, args) -> int:
    suites = _select_suites(cfg, args.suite, SYMBOLIC_SUITES)
    report = run_all_suites(cfg.suite_config(suites))
    return _emit_report("susy-check", cfg, report, Path(cfg.out), "susy-check")


def cmd_verify(cfg: RunConfig, args) -> int:
    from .suites import ALL_SUITES

    suites = _select_suites(cfg, args.suite, ALL_SUITES)
    report = run_all_suites(cfg.suite_config(suites))
    return _emit_report("verify", cfg, report, Path(cfg.out), "verify")


def cmd_partition_reroot_reduce(cfg: RunConfig, args) -> int:
    suites = _select_suites(cfg, args.suite, GRAPH_SUITES)
    report = run_all_suites(cfg.suite_config(suites))
    return _emit_report("partition-reroot-reduce", cfg, report, Path(cfg.out), "partition-reroot-reduce")


def _scan_graphs(cfg: RunConfig) -> Dict[str, RootedGraph]:
    if cfg.graph is not None:
        return {Path(cfg.graph).stem: load_graph(cfg.graph)}
    return {f"K{n}": RootedGraph.complete(n, 1.0) for n in cfg.sizes}


def cmd_mono_scan(cfg: RunConfig, args) -> int:
    graphs = _scan_graphs(cfg)
    limit = QUAD_MAX_N if cfg.backend == "quad" else MCMC_MAX_N
    for name, g in graphs.items():
        if g.n > limit:
            raise SizeError(f"graph {name} has N = {g.n}; the {cfg.backend} backend supports N <= {limit}")
    # resolve probes and edges for every graph before running anything
    plans = []
    for name, g in graphs.items():
        probes = resolve(g.n, cfg.probes)
        if cfg.edges is None:
            edges = g.edges()
        else:
            by_label = {g.edge_label(e): e for e in g.edges()}
            unknown = [e for e in cfg.edges if e not in by_label]
            if unknown:
                raise ConfigError(f"graph {name}: unknown edges {unknown}; available: {sorted(by_label)}")
            edges = [by_label[e] for e in cfg.edges]
        plans.append((name, g, probes, edges))

    text = cfg.digest() + "".join(format_graph(g) for g in graphs.values())
    digest = hashlib.sha256(text.encode()).hexdigest()[:16]
    reports = []
    for name, g, probes, edges in plans:
        reports += monotonicity_scan(
            {name: g}, probes, edges, cfg.w_grid, cfg.quadrature_spec(), cfg.tolerance,
            cfg.method, cfg.backend, cfg.chain_spec(), cfg.workers,
        )
    out = Path(cfg.out)
    rows = scan_rows(reports, digest)
    write_csv(out / "mono-scan.csv", SCAN_COLUMNS, rows)
    violations = [f"{r.graph} {r.edge} {r.probe}" for r in reports if not r.passed]
    write_json(out / "mono-scan.json", {
        **_header("mono-scan", cfg, digest),
        "bank-version": BANK_VERSION,
        "rows": len(rows),
        "pass": not violations,
        "violations": violations,
        "expect-violations": bool(args.expect_violations),
    })
    print(f"{len(rows)} rows, {len(violations)} violating (graph, edge, probe) series")
    for v in violations:
        print(f"VIOLATION {v}", file=sys.stderr)
    if args.expect_violations:
        return 0 if violations else 1
    return 1 if violations else 0


def cmd_export_plotdata(cfg: RunConfig, args) -> int:
    src = Path(args.input) if args.input else Path(cfg.out) / "mono-scan.csv"
    rows = plot_rows(read_scan_csv(src))
    dest = Path(cfg.out) / "plotdata.csv"
    write_csv(dest, PLOT_COLUMNS, rows)
    print(f"{len(rows)} rows -> {dest}")
    return 0


COMMANDS = {
    "susy-check": (cmd_susy_check, "exact symbolic identity batteries"),
    "mono-scan": (cmd_mono_scan, "dK/dW sign scan over edges, probes and a W grid"),
    "partition-reroot-reduce": (cmd_partition_reroot_reduce,
                                "partition/Ward, rerooting, Schur reduction and two-point law"),
    "export-plotdata": (cmd_export_plotdata, "long-format K and dK/dW curves from a mono-scan"),
    "verify": (cmd_verify, "every battery, symbolic and numeric"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="h22lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"h22lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--suite", action="append", help="run only this suite (repeatable)")
        p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--expect-violations", action="store_true",
                       help="succeed only if the scan flags a violation")
        p.add_argument("--probe", action="append", help="probe name for mono-scan (repeatable)")
        p.add_argument("--graph", help="graph file for mono-scan")
        p.add_argument("--input", help="mono-scan CSV for export-plotdata")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if args.probe:
        overrides["probes"] = list(args.probe)
    if args.graph is not None:
        overrides["graph"] = args.graph
    if args.suite:
        overrides["suites"] = list(args.suite)
    return cfg.replace(**overrides) if overrides else cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command][0](cfg, args)
    except (H22Error, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"h22lab {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
