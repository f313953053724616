"""Command-line entry point: run, measure, fixture, compare, verify."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .. import fixtures, invariants
from ..demand import InfiniteDemandError, phi_integral, phi_stationary
from ..geometry import InvalidRegimeError
from ..motion import configuration_at, validate
from ..schemes import SchemeConfig, SchemeError, run_scheme
from ..schemes.baselines import oblivious_window_config
from . import io
from .simulate import REPORT_HEADER, WINDOW_HEADER, simulate

OUT_ENV = "CPQUERY_OUT"
EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _out_dir(arg: str | None) -> Path:
    path = Path(arg or os.environ.get(OUT_ENV, "cpquery-out"))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(path: str) -> io.ScenarioDocument:
    doc = io.load_document(path)
    problems = validate(doc.scenario)
    if problems:
        raise io.ScenarioFormatError("entities", "; ".join(problems[:5]))
    return doc


def _default_x(doc: io.ScenarioDocument, x: int | None) -> int:
    if x is not None:
        return x
    if doc.scheme is not None:
        return doc.scheme.bound
    if "degree_bound" in doc.scenario.expectations:
        return int(doc.scenario.expectations["degree_bound"])
    if "x" in doc.scenario.expectations:
        return int(doc.scenario.expectations["x"])
    raise UsageError("no congestion bound given; pass --x")


def resolve_scheme(text: str, doc: io.ScenarioDocument, x: int) -> SchemeConfig:
    """A scheme from inline JSON, a JSON file, or ``kind[:script]``."""
    text = text.strip()
    if text.startswith("{"):
        return io._parse_scheme(json.loads(text))
    if text.endswith(".json") and Path(text).exists():
        return io._parse_scheme(json.loads(Path(text).read_text()))
    if text == "oblivious":
        return oblivious_window_config(doc.scenario, x)
    kind, _, script = text.partition(":")
    params = {"script": script} if script else {}
    if kind == "ftt" and doc.scenario.target_time is None:
        raise UsageError("ftt needs a scenario with target_time")
    try:
        return SchemeConfig(kind=kind, x=x, target_time=doc.scenario.target_time, params=params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_plot(report, trace, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "cpquery"
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    t = report.times
    top.step(t, report.column("degree"), where="post", label="degree")
    ply = report.column("ply")
    if all(isinstance(v, int) for v in ply):
        top.step(t, ply, where="post", label="ply")
    top.set_ylabel("congestion")
    top.legend(loc="upper right")
    bottom.plot(trace.times, trace.entities, "|", markersize=4)
    bottom.set_xlabel("time")
    bottom.set_ylabel("entity")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_run(args) -> int:
    doc = _load(args.scenario)
    x = _default_x(doc, args.x)
    cfg = resolve_scheme(args.scheme, doc, x) if args.scheme else doc.scheme
    if cfg is None:
        raise UsageError("no scheme in the scenario file; pass --scheme")
    trace = run_scheme(doc.scenario, cfg)
    report = simulate(doc.scenario, trace, x, doc.report, t_start=args.t_start)
    out = _out_dir(args.out)
    io.save_trace(trace, out / "trace.csv")
    io.write_csv(out / "report.csv", REPORT_HEADER, report.rows)
    io.write_csv(out / "windows.csv", WINDOW_HEADER, report.windows)
    if args.plot:
        _write_plot(report, trace, out / "congestion.svg")
    # before every entity has been queried once, unbounded regions swamp the maximum
    first: dict[int, float] = {}
    for t, i in zip(trace.times, trace.entities):
        first.setdefault(i, t)
    covered = max(first.values()) if len(first) == doc.scenario.n else math.inf
    degrees = [r[1] for r in report.rows if r[1] != "" and r[0] >= covered]
    print(f"{trace.scheme}: {len(trace)} queries, max degree once all queried {max(degrees) if degrees else 'n/a'}")
    if doc.scenario.target_time is not None:
        tau = doc.scenario.target_time
        at = [r for r in report.rows if abs(r[0] - tau) <= 1e-9]
        if at:
            print(f"degree at target time {tau:g}: {at[0][1]}")
    for w in report.warnings:
        print(f"warning: {w}")
    return EXIT_OK if trace.feasible else EXIT_INFEASIBLE


def cmd_measure(args) -> int:
    doc = _load(args.scenario)
    scn = doc.scenario
    x = _default_x(doc, args.x)
    windows = [tuple(w) for w in args.window] if args.window else [(0.0, scn.horizon)]
    rows = []
    for a, b in windows:
        if b < a:
            raise UsageError(f"window [{a}, {b}] is reversed")
        try:
            val = phi_integral(scn, x, (a, b))
        except InfiniteDemandError:
            val = math.inf
        rows.append([a, b, val])
        print(f"phi_integral[{a:g}, {b:g}] = {val!r}")
    if scn.is_stationary:
        try:
            print(f"phi_stationary = {phi_stationary(configuration_at(scn, 0.0), x)!r}")
        except InfiniteDemandError:
            print("phi_stationary = inf")
    if args.out:
        io.write_csv(_out_dir(args.out) / "measure.csv", ["t_start", "t_end", "phi_integral"], rows)
    return EXIT_OK


def _coerce(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    if v.lower() in ("true", "false"):
        return v.lower() == "true"
    return v


def cmd_fixture(args, extra: list[str]) -> int:
    if args.name not in fixtures.FIXTURES:
        raise UsageError(f"unknown fixture {args.name!r}; choose from {sorted(fixtures.FIXTURES)}")
    params = {}
    it = iter(extra)
    for flag in it:
        if not flag.startswith("--"):
            raise UsageError(f"unexpected argument {flag!r}")
        key = flag[2:].replace("-", "_")
        try:
            params[key] = _coerce(next(it))
        except StopIteration:
            raise UsageError(f"{flag} needs a value") from None
    try:
        scn = fixtures.FIXTURES[args.name](**params)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    path = Path(args.output) if args.output else _out_dir(None) / f"{scn.name or args.name}.json"
    io.save_scenario(scn, path)
    print(path)
    return EXIT_OK


def cmd_compare(args) -> int:
    doc = _load(args.scenario)
    scn = doc.scenario
    x = _default_x(doc, args.x)
    names = [s for s in args.schemes.split(",") if s]
    if len(names) < 2:
        raise UsageError("compare needs at least two schemes")
    tau, win = scn.target_time, scn.expectations.get("window")
    lo, hi = (tau - win, tau + 1e-9) if tau is not None and win is not None else (0.0, scn.horizon + 1e-9)
    rows = []
    base_gran = None
    for name in names:
        cfg = resolve_scheme(name, doc, x)
        trace = run_scheme(scn, cfg)
        report = simulate(scn, trace, x, doc.report, measures=("degree", "ply"))
        gran = trace.min_granularity(lo, hi)
        base_gran = gran if base_gran is None else base_gran
        ratio = base_gran / gran if gran > 0 and math.isfinite(gran) else math.nan
        degs = [d for d in report.column("degree")]
        plies = [p for p in report.column("ply")]
        rows.append([name, len(trace), trace.count_in(lo, hi), gran, ratio, max(degs), max(plies)])
    header = ["scheme", "queries", "window_queries", "min_granularity", "ratio", "max_degree", "max_ply"]
    print(",".join(header))
    for r in rows:
        print(",".join(io._fmt(v) for v in r))
    if args.out:
        io.write_csv(_out_dir(args.out) / "compare.csv", header, rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    res = invariants.run_suite(seed=args.seed, instances=args.instances)
    print(
        f"{res.instances} instances: cover violations {res.cover_violations}, "
        f"neighbor violations {res.neighbor_violations}, packing violations {res.packing_violations}"
    )
    for line in res.details[:10]:
        print(line)
    return EXIT_OK if res.ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cpquery", description="Query scheduling for moving entities under uncertainty")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scheme and write trace and report CSVs")
    r.add_argument("scenario")
    r.add_argument("--scheme", help="kind[:script], inline JSON, or a JSON file")
    r.add_argument("--x", type=int)
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./cpquery-out)")
    r.add_argument("--t-start", type=float, default=0.0, help="first sample time")
    r.add_argument("--plot", action="store_true", help="also write congestion.svg")

    m = sub.add_parser("measure", help="demand functionals only")
    m.add_argument("scenario")
    m.add_argument("--x", type=int)
    m.add_argument("--window", type=float, nargs=2, action="append", metavar=("START", "END"))
    m.add_argument("--out")

    f = sub.add_parser("fixture", help="write a generated scenario file; extra --key value pairs are passed on")
    f.add_argument("name")
    f.add_argument("-o", "--output")

    c = sub.add_parser("compare", help="run several schemes side by side")
    c.add_argument("scenario")
    c.add_argument("--schemes", required=True)
    c.add_argument("--x", type=int)
    c.add_argument("--out")

    v = sub.add_parser("verify", help="randomized geometric invariant suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--instances", type=int, default=200)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "fixture":
            return cmd_fixture(args, extra)
        if extra:
            raise UsageError(f"unrecognized arguments: {' '.join(extra)}")
        handler = {"run": cmd_run, "measure": cmd_measure, "compare": cmd_compare, "verify": cmd_verify}[args.command]
        return handler(args)
    except (UsageError, InvalidRegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (io.ScenarioFormatError, FileNotFoundError, fixtures.FixtureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SchemeError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
