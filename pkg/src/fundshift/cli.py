"""Command-line front end.

Three subcommands cover the whole workflow:

* ``fundshift simulate`` renders a JSON simulation spec into NAV,
  benchmark, factor and map files plus the planted ground truth,
* ``fundshift analyze`` runs the detection/classification/metrics
  pipeline over a directory of funds and writes one JSON report,
* ``fundshift report`` renders an aggregate table (breaks,
  transitions, performance, deciles) from a report file as CSV or
  Markdown.

Exit codes are stable: 0 success, 2 usage or configuration error,
3 I/O error, 4 analysis produced no analyzable fund. The env var
``FUNDSHIFT_LOG`` (DEBUG/INFO/WARNING/ERROR) controls verbosity. All
output files are written atomically (temp file, then rename) and are
byte-identical across reruns on identical inputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .marketdata import (
    MarketDataError,
    ReturnSeries,
    compute_returns,
    align,
    parse_benchmark_map_csv,
    parse_factor_csv,
    parse_nav_csv,
    write_benchmark_map_csv,
    write_factor_csv,
    write_nav_csv,
)
from .perf import GROUP_CSV_HEADER
from .pipeline import AnalysisConfig, ConfigError, FundRecord, analyze_fund, build_report
from .synth import SynthError, parse_sim_spec, run_simulation, truth_to_dict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_EMPTY = 4

log = logging.getLogger("fundshift")


def _setup_logging() -> None:
    level_name = os.environ.get("FUNDSHIFT_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _fail(message: str, code: int) -> int:
    print(f"fundshift: error: {message}", file=sys.stderr)
    return code


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def cmd_simulate(args: argparse.Namespace) -> int:
    spec_path = Path(args.spec)
    try:
        text = spec_path.read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(f"cannot read spec file: {exc}", EXIT_IO)
    try:
        spec = parse_sim_spec(json.loads(text))
    except (json.JSONDecodeError, SynthError, TypeError, ValueError) as exc:
        return _fail(f"invalid simulation spec: {exc}", EXIT_CONFIG)

    try:
        sim = run_simulation(spec, seed=args.seed)
    except SynthError as exc:
        return _fail(f"simulation failed: {exc}", EXIT_CONFIG)

    out = Path(args.out)
    try:
        for nav in sim.funds:
            _atomic_write(out / "nav" / f"{nav.fund_id}.csv", write_nav_csv(nav))
        for nav in sim.benchmarks:
            _atomic_write(out / "bench_nav" / f"{nav.fund_id}.csv", write_nav_csv(nav))
        _atomic_write(out / "factors.csv", write_factor_csv(sim.factors))
        _atomic_write(out / "benchmark_map.csv", write_benchmark_map_csv(sim.benchmark_map))
        truth = {
            "seed": sim.seed,
            "funds": [
                truth_to_dict(t) for t in sorted(sim.truths, key=lambda t: t.fund_id)
            ],
        }
        _atomic_write(out / "truth.json", _dump_json(truth))
    except OSError as exc:
        return _fail(f"cannot write outputs: {exc}", EXIT_IO)

    log.info("simulated %d funds into %s", len(sim.funds), out)
    return EXIT_OK


def _analyze_one(
    fund_path: Path,
    bench_returns: ReturnSeries,
    factors,
    config: AnalysisConfig,
) -> FundRecord:
    nav = parse_nav_csv(fund_path.read_text(encoding="utf-8"), fund_path.stem)
    sample = align(
        compute_returns(nav), bench_returns, factors, min_obs=config.min_aligned_obs
    )
    return analyze_fund(sample, config)


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        config = AnalysisConfig(
            sig_level=args.sig,
            trim=args.trim,
            max_breaks=args.max_breaks,
            min_regime_obs=args.min_regime_obs,
            hac=args.hac,
            carhart=args.carhart,
        )
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    if args.jobs < 1:
        return _fail(f"--jobs must be >= 1, got {args.jobs}", EXIT_CONFIG)

    try:
        factors = parse_factor_csv(Path(args.factors).read_text(encoding="utf-8"))
        bmap = parse_benchmark_map_csv(Path(args.bench_map).read_text(encoding="utf-8"))
    except OSError as exc:
        return _fail(f"cannot read input: {exc}", EXIT_IO)
    except MarketDataError as exc:
        return _fail(f"bad input file: {exc}", EXIT_CONFIG)
    if config.carhart and not factors.has_mom:
        return _fail("--carhart requires a mom column in the factor file", EXIT_CONFIG)

    nav_dir = Path(args.nav)
    try:
        fund_paths = sorted(p for p in nav_dir.iterdir() if p.suffix == ".csv")
    except OSError as exc:
        return _fail(f"cannot list NAV directory: {exc}", EXIT_IO)

    # Parse each referenced benchmark once, shared across funds.
    bench_dir = Path(args.bench_nav)
    bench_returns: dict[str, ReturnSeries] = {}
    bench_errors: dict[str, str] = {}
    needed = sorted(
        {bmap.benchmark_for(p.stem) for p in fund_paths} - {None}
    )
    for bench_id in needed:
        try:
            nav = parse_nav_csv(
                (bench_dir / f"{bench_id}.csv").read_text(encoding="utf-8"), bench_id
            )
            bench_returns[bench_id] = compute_returns(nav)
        except (OSError, MarketDataError) as exc:
            bench_errors[bench_id] = str(exc)

    skipped: list[tuple[str, str]] = []
    tasks: list[tuple[str, Path, ReturnSeries]] = []
    for path in fund_paths:
        fund_id = path.stem
        bench_id = bmap.benchmark_for(fund_id)
        if bench_id is None:
            skipped.append((fund_id, "no benchmark"))
        elif bench_id in bench_errors:
            skipped.append((fund_id, f"benchmark {bench_id}: {bench_errors[bench_id]}"))
        else:
            tasks.append((fund_id, path, bench_returns[bench_id]))

    def run(task: tuple[str, Path, ReturnSeries]):
        fund_id, path, bench = task
        try:
            record = _analyze_one(path, bench, factors, config)
            log.info("analyzed %s: %d break(s)", fund_id, record.break_set.chosen_m)
            return fund_id, record, None
        except (ValueError, OSError) as exc:
            log.warning("skipping %s: %s", fund_id, exc)
            return fund_id, None, str(exc)

    if args.jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(t) for t in tasks]

    records = []
    for fund_id, record, reason in outcomes:
        if record is None:
            skipped.append((fund_id, reason))
        else:
            records.append(record)

    if not records:
        return _fail("no analyzable fund", EXIT_EMPTY)

    report = build_report(records, skipped, config, version=__version__)
    try:
        _atomic_write(Path(args.out), _dump_json(report))
    except OSError as exc:
        return _fail(f"cannot write report: {exc}", EXIT_IO)
    log.info("analyzed %d fund(s), skipped %d", len(records), len(skipped))
    return EXIT_OK


def _md_table(header: list[str], rows: list[list[str]]) -> str:
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _render(header: list[str], rows: list[list[str]], fmt: str) -> str:
    if fmt == "csv":
        return "\n".join([",".join(header)] + [",".join(r) for r in rows]) + "\n"
    return _md_table(header, rows)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_breaks(agg: dict, fmt: str) -> str:
    hist = agg["break_histogram"]
    rows = [
        [str(r["n_breaks"]), str(r["funds"]), str(r["breaks"])] for r in hist["rows"]
    ]
    rows.append(
        ["total", str(hist["total_funds_with_breaks"]), str(hist["total_breaks"])]
    )
    return _render(["n_breaks", "funds", "breaks"], rows, fmt)


def _render_transitions(agg: dict, fmt: str) -> str:
    t = agg["transitions"]
    labels, counts = t["labels"], t["counts"]
    header = ["style_t"] + labels + ["Total"]
    rows = []
    for i, label in enumerate(labels):
        rows.append([label] + [str(c) for c in counts[i]] + [str(sum(counts[i]))])
    col_totals = [sum(row[j] for row in counts) for j in range(len(labels))]
    rows.append(["Total"] + [str(c) for c in col_totals] + [str(t["grand_total"])])
    return _render(header, rows, fmt)


def _render_performance(agg: dict, fmt: str) -> str:
    header = GROUP_CSV_HEADER.split(",")
    rows = []
    for r in agg["performance_by_breaks"]["rows"]:
        rows.append([_cell(r[name]) for name in header])
    return _render(header, rows, fmt)


def _render_deciles(agg: dict, fmt: str) -> str:
    d = agg["deciles"]
    if d is None:
        return "no decile analysis (fewer than 10 funds)\n"
    rows = []
    for i, fund_id in enumerate(d["top_fund_ids"], start=1):
        rows.append(["top_funds", str(i), fund_id])
    for i, fund_id in enumerate(d["bottom_fund_ids"], start=1):
        rows.append(["bottom_funds", str(i), fund_id])
    for section in ("top_intensity", "bottom_intensity",
                    "top_destinations", "bottom_destinations"):
        for key, count in d[section].items():
            rows.append([section, key, str(count)])
    return _render(["section", "key", "value"], rows, fmt)


_TABLE_RENDERERS = {
    "breaks": _render_breaks,
    "transitions": _render_transitions,
    "performance": _render_performance,
    "deciles": _render_deciles,
}


def cmd_report(args: argparse.Namespace) -> int:
    try:
        text = Path(args.report_path).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(f"cannot read report: {exc}", EXIT_IO)
    try:
        report = json.loads(text)
        agg = report["aggregates"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        return _fail(f"invalid report file: {exc}", EXIT_CONFIG)
    try:
        rendered = _TABLE_RENDERERS[args.table](agg, args.format)
    except (KeyError, TypeError) as exc:
        return _fail(f"report file missing required data: {exc}", EXIT_CONFIG)
    sys.stdout.write(rendered)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fundshift",
        description=(
            "Detect benchmark-adjusted structural breaks in fund style exposures, "
            "classify style regimes and attribute performance by break count."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate synthetic fixtures from a JSON spec")
    p_sim.add_argument("--spec", required=True, help="simulation spec JSON file")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--seed", type=int, default=None, help="override the spec's seed")
    p_sim.set_defaults(func=cmd_simulate)

    p_an = sub.add_parser("analyze", help="run the full pipeline over a fund directory")
    p_an.add_argument("--nav", required=True, help="directory of per-fund NAV CSVs")
    p_an.add_argument("--factors", required=True, help="factor panel CSV")
    p_an.add_argument("--bench-map", required=True, help="fund-to-benchmark map CSV")
    p_an.add_argument("--bench-nav", required=True, help="directory of benchmark NAV CSVs")
    p_an.add_argument("--out", required=True, help="output report JSON file")
    p_an.add_argument("--sig", type=float, default=0.05, help="significance level")
    p_an.add_argument("--trim", type=float, default=0.15, help="minimum segment fraction")
    p_an.add_argument("--max-breaks", type=int, default=5, help="maximum break count")
    p_an.add_argument(
        "--min-regime-obs", type=int, default=0,
        help="drop breaks flanked by regimes shorter than this (500 is about 24 months)",
    )
    p_an.add_argument("--hac", action="store_true", help="Newey-West standard errors")
    p_an.add_argument("--carhart", action="store_true",
                      help="add a four-factor diagnostic fit per fund")
    p_an.add_argument("--jobs", type=int, default=1, help="concurrent fund workers")
    p_an.set_defaults(func=cmd_analyze)

    p_rep = sub.add_parser("report", help="render an aggregate table from a report file")
    p_rep.add_argument("--in", dest="report_path", required=True, help="report JSON file")
    p_rep.add_argument(
        "--table", required=True, choices=sorted(_TABLE_RENDERERS), help="table to render"
    )
    p_rep.add_argument("--format", choices=["csv", "md"], default="csv")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
