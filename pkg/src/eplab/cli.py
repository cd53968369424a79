"""Command-line front door.

Subcommands: model-curve, simulate, sweep, fit, pareto, trace-stats,
serve.  Every command reads the shared JSON config file; command-line
flags override file values.  On failure the process exits nonzero after
printing one machine-parsable line to stderr:

    error: {"code": "<kind>", "message": "<detail>"}
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import replace

from . import config as cfgmod
from . import tracelog
from .engine import OverloadError, SimValidationError, energy_time_product, simulate
from .fitting import FitError, fit_scenario
from .model import curve_sweep, write_curve_csv
from .repo import Repository, UnknownDigestError
from .sweep import (
    SweepError,
    SweepGrid,
    find_markers,
    pareto_front,
    read_sweep_file,
    run_sweep,
    write_sweep_file,
)


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = 1):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


def _fail(code, message, exit_code=1):
    raise CliError(code, message, exit_code)


def _load_config(path) -> cfgmod.LabConfig:
    try:
        return cfgmod.load_file(path)
    except FileNotFoundError:
        _fail("config-missing", f"config file not found: {path}")
    except cfgmod.ConfigError as e:
        _fail("config-invalid", str(e))


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)


def _json_line(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True) + "\n"


def _parse_delta_grid(spec: str) -> list[float]:
    if ":" in spec:
        lo, hi, step = (float(x) for x in spec.split(":"))
        out = []
        d = lo
        while d <= hi + 1e-12:
            out.append(round(d, 10))
            d += step
        return out
    return [float(x) for x in spec.split(",") if x]


def cmd_model_curve(args) -> int:
    doc = _load_config(args.config)
    scenario = doc.require("scenario")
    deltas = _parse_delta_grid(args.deltas)
    points = curve_sweep(scenario, deltas)
    buf = io.StringIO()
    write_curve_csv(points, buf)
    _write_output(buf.getvalue(), args.out)
    return 0


def _override_sim(sim, args):
    if getattr(args, "delta", None) is not None:
        sim = replace(sim, dvfs=args.delta)
    if getattr(args, "itr", None) is not None:
        from .engine import ItrSetting
        sim = replace(sim, nic=replace(sim.nic, itr=ItrSetting(args.itr)))
    if getattr(args, "seed", None) is not None:
        sim = replace(sim, seed=args.seed)
    return sim


def cmd_simulate(args) -> int:
    doc = _load_config(args.config)
    sim = _override_sim(doc.require("sim"), args)
    workload = doc.require("workload")
    try:
        result = simulate(sim, workload)
    except OverloadError as e:
        _fail("overload", str(e), exit_code=2)

    trace_text = tracelog.dumps(result.trace)
    if args.out_trace:
        _write_output(trace_text, args.out_trace)
    summary = {
        "schema_version": 1,
        "config_digest": result.config_digest,
        "workload_kind": result.workload_kind,
        "requests": int(result.latencies_us.size),
        "p99_latency_us": result.p99_latency_us(),
        "mean_latency_us": result.mean_latency_us(),
        "total_energy_j": result.total_energy_j,
        "interrupt_count": result.interrupt_count,
        "instructions": result.instructions,
        "completion_time_us": result.completion_us,
        "wall_time_us": result.wall_us,
    }
    if result.workload_kind == "closed":
        summary["energy_time_product_js"] = energy_time_product(result)
    if args.repo:
        repo = Repository(args.repo)
        digest = repo.put_text(trace_text, "trace", name=args.name)
        repo.put_text(json.dumps({"sim": cfgmod.dump_sim_config(sim),
                                  "workload": cfgmod.dump_workload(workload)},
                                 sort_keys=True, separators=(",", ":")),
                      "config")
        summary["trace_digest"] = digest
    _write_output(_json_line(summary), args.summary)
    return 0


def cmd_sweep(args) -> int:
    doc = _load_config(args.config)
    sim = _override_sim(doc.require("sim"), args)
    workload = doc.require("workload")
    grid = doc.sweep if doc.sweep is not None else SweepGrid()
    if args.repetitions is not None:
        grid = replace(grid, repetitions=args.repetitions)
    if args.seed_base is not None:
        grid = replace(grid, seed_base=args.seed_base)
    try:
        points = run_sweep(grid, sim, workload)
    except SweepError as e:
        _fail("sweep-cell", str(e), exit_code=2)
    buf = io.StringIO()
    write_sweep_file(buf, points, grid, sim, workload)
    text = buf.getvalue()
    if args.out:
        _write_output(text, args.out)
    markers = find_markers(points, workload.kind)
    summary = {
        "schema_version": 1,
        "points": len(points),
        "markers": _markers_json(markers),
    }
    if args.repo:
        repo = Repository(args.repo)
        summary["sweep_digest"] = repo.put_text(text, "sweep", name=args.name)
    sys.stdout.write(_json_line(summary))
    return 0


def _point_json(p):
    return p.to_json_obj()


def _markers_json(markers):
    out = {"min_energy": _point_json(markers.min_energy),
           "min_latency": _point_json(markers.min_latency)}
    if markers.best_efficiency is not None:
        out["best_efficiency"] = _point_json(markers.best_efficiency)
    return out


def _load_sweep(args):
    if args.repo:
        repo = Repository(args.repo)
        try:
            digest = repo.resolve(args.sweep)
            return read_sweep_file(repo.get_text(digest))
        except UnknownDigestError:
            pass  # fall back to a file path
    try:
        with open(args.sweep, "r", encoding="utf-8") as f:
            return read_sweep_file(f)
    except FileNotFoundError:
        _fail("artifact-missing", f"sweep not found: {args.sweep}")
    except ValueError as e:
        _fail("artifact-invalid", str(e))


def cmd_pareto(args) -> int:
    sweep = _load_sweep(args)
    frontier = pareto_front(sweep.points)
    markers = find_markers(sweep.points, sweep.workload_kind)
    out = {
        "schema_version": 1,
        "workload_kind": sweep.workload_kind,
        "frontier": [_point_json(p) for p in frontier],
        "markers": _markers_json(markers),
    }
    _write_output(_json_line(out), args.out)
    return 0


def cmd_fit(args) -> int:
    sweep = _load_sweep(args)
    points = sweep.points
    if args.itr is not None:
        points = [p for p in points if p.itr_ticks == args.itr]
        if not points:
            _fail("fit-input", f"no sweep points at itr={args.itr}")
    try:
        result = fit_scenario(points, sweep.workload_kind)
    except FitError as e:
        _fail("fit-failed", str(e), exit_code=2)
    text = _json_line(result.to_json_obj())
    if args.repo:
        Repository(args.repo).put_text(text, "fit", name=args.name)
    _write_output(text, args.out)
    return 0


def _load_trace(args):
    if args.repo:
        repo = Repository(args.repo)
        try:
            digest = repo.resolve(args.trace)
            return tracelog.parse_stream(repo.get_text(digest))
        except UnknownDigestError:
            pass
    try:
        return tracelog.parse_file(args.trace)
    except FileNotFoundError:
        _fail("artifact-missing", f"trace not found: {args.trace}")
    except tracelog.TraceParseError as e:
        _fail("artifact-invalid", str(e))


def cmd_trace_stats(args) -> int:
    stream = _load_trace(args)
    windows = tracelog.aggregate(stream, args.window_us)
    total = tracelog.totals(stream)
    out = {
        "schema_version": 1,
        "window_us": args.window_us,
        "windows": [_window_json(w) for w in windows],
        "totals": _window_json(total),
    }
    _write_output(_json_line(out), args.out)
    return 0


def _window_json(w):
    return {"t0_us": w.t0_us, "t1_us": w.t1_us, "interrupts": w.interrupts,
            "rx_bytes": w.rx_bytes, "tx_bytes": w.tx_bytes,
            "rx_descriptors": w.rx_descriptors, "tx_descriptors": w.tx_descriptors,
            "sleep_entries": w.sleep_entries,
            "sleep_residency_us": w.sleep_residency_us,
            "joules": w.joules, "instructions": w.instructions, "cycles": w.cycles}


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(args.repo, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eplab",
        description="Energy/performance lab for network-driven request processing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model-curve", help="evaluate normalized model curves to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--deltas", default="0.05:1.0:0.05",
                   help="lo:hi:step or comma-separated list")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_model_curve)

    p = sub.add_parser("simulate", help="run one simulation; emit trace + summary")
    p.add_argument("--config", required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--itr", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-trace", default=None)
    p.add_argument("--summary", default=None, help="summary JSON path (default stdout)")
    p.add_argument("--repo", default=None)
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a (dvfs x itr) grid sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--seed-base", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--itr", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="sweep file path")
    p.add_argument("--repo", default=None)
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit scaling exponents to a sweep")
    p.add_argument("--sweep", required=True, help="sweep file, digest, or name")
    p.add_argument("--itr", type=int, default=None,
                   help="restrict to one itr column first")
    p.add_argument("--out", default=None)
    p.add_argument("--repo", default=None)
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("pareto", help="frontier and markers from a sweep")
    p.add_argument("--sweep", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--repo", default=None)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("trace-stats", help="windowed aggregates of a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--window-us", type=float, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--repo", default=None)
    p.set_defaults(func=cmd_trace_stats)

    p = sub.add_parser("serve", help="HTTP API over a repository")
    p.add_argument("--repo", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--ui-dir", default=None, help="static explorer bundle to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        sys.stderr.write("error: " + json.dumps(
            {"code": e.code, "message": str(e)}, separators=(",", ":")) + "\n")
        return e.exit_code
    except (SimValidationError, cfgmod.ConfigError) as e:
        sys.stderr.write("error: " + json.dumps(
            {"code": "invalid-input", "message": str(e)}, separators=(",", ":")) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
