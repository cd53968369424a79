"""Exhaustive (DVFS x interrupt-delay) grid experiments over one workload.

Every grid cell runs the simulator `repetitions` times with derived seeds
(seed_base + repetition index, the same seeds across cells so comparisons
are paired).  Cells are independent; results do not depend on evaluation
order.  Sweep results persist as a line-delimited file with a header line
carrying the grid, seeds, configuration, and schema version, one JSON
object per point after it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .engine import (
    ItrSetting,
    OverloadError,
    SimConfig,
    SimResult,
    WorkloadSpec,
    energy_time_product,
    simulate,
    with_dvfs_and_itr,
)

SWEEP_SCHEMA_VERSION = 1

# Default grid mirroring coarse hardware knobs: DVFS 0.4..1.0 in 0.05
# steps, throttle ticks from "off" to 100us windows.
DEFAULT_DELTAS = tuple(round(0.4 + 0.05 * i, 2) for i in range(13))
DEFAULT_ITR_TICKS = (0, 1, 2, 3, 4, 5, 6, 8, 10, 14, 20, 28, 50, 100)


class SweepError(RuntimeError):
    """A grid cell failed; carries which one."""

    def __init__(self, delta: float, ticks: int, cause: Exception):
        super().__init__(f"sweep cell (delta={delta}, itr={ticks}) failed: {cause}")
        self.delta = delta
        self.ticks = ticks
        self.cause = cause


@dataclass(frozen=True)
class SweepGrid:
    delta_values: tuple[float, ...] = DEFAULT_DELTAS
    itr_values: tuple[ItrSetting, ...] = tuple(ItrSetting(t) for t in DEFAULT_ITR_TICKS)
    repetitions: int = 10
    seed_base: int = 0

    def __post_init__(self):
        if not self.delta_values or not self.itr_values:
            raise ValueError("sweep grid must have deltas and itr values")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for d in self.delta_values:
            if not (0.0 < d <= 1.0):
                raise ValueError(f"grid delta {d} outside (0, 1]")


@dataclass(frozen=True)
class MetricStats:
    """Repetition aggregate: mean with min/max spread and the raw values."""

    mean: float
    min: float
    max: float
    raw: tuple[float, ...]

    def __post_init__(self):
        if not (self.min <= self.mean <= self.max):
            raise ValueError("metric spread must contain the mean")

    @classmethod
    def of(cls, values) -> "MetricStats":
        vals = tuple(float(v) for v in values)
        return cls(mean=float(np.mean(vals)), min=min(vals), max=max(vals), raw=vals)

    def to_json_obj(self):
        return {"mean": self.mean, "min": self.min, "max": self.max,
                "raw": list(self.raw)}

    @classmethod
    def from_json_obj(cls, obj):
        return cls(mean=obj["mean"], min=obj["min"], max=obj["max"],
                   raw=tuple(obj["raw"]))


METRIC_NAMES = ("p99_latency_us", "mean_latency_us", "total_energy_j",
                "energy_time_product_js", "interrupt_count", "instructions",
                "active_time_us", "mean_detect_us", "completion_time_us",
                "wall_time_us")


@dataclass(frozen=True)
class SweepPoint:
    delta: float
    itr_ticks: int
    workload_kind: str
    metrics: dict

    def metric(self, name: str) -> float:
        return self.metrics[name].mean

    @property
    def total_energy_j(self) -> float:
        return self.metric("total_energy_j")

    @property
    def performance_metric(self) -> str:
        """p99 for open-loop points, completion time for closed loop."""
        return "p99_latency_us" if self.workload_kind == "open" else "completion_time_us"

    @property
    def performance(self) -> float:
        return self.metric(self.performance_metric)

    def to_json_obj(self):
        return {"kind": "sweep-point", "delta": self.delta, "itr_ticks": self.itr_ticks,
                "workload_kind": self.workload_kind,
                "metrics": {k: v.to_json_obj() for k, v in self.metrics.items()}}

    @classmethod
    def from_json_obj(cls, obj):
        return cls(delta=obj["delta"], itr_ticks=obj["itr_ticks"],
                   workload_kind=obj["workload_kind"],
                   metrics={k: MetricStats.from_json_obj(v)
                            for k, v in obj["metrics"].items()})


def _result_metrics(res: SimResult) -> dict[str, float]:
    m = {
        "p99_latency_us": res.p99_latency_us(),
        "mean_latency_us": res.mean_latency_us(),
        "total_energy_j": res.total_energy_j,
        "interrupt_count": float(res.interrupt_count),
        "instructions": res.instructions,
        "active_time_us": res.active_us,
        "mean_detect_us": float(res.detect_us.mean()),
        "completion_time_us": res.completion_us,
        "wall_time_us": res.wall_us,
    }
    if res.workload_kind == "closed":
        m["energy_time_product_js"] = energy_time_product(res)
    return m


def run_cell(config: SimConfig, workload: WorkloadSpec, grid: SweepGrid,
             delta: float, itr: ItrSetting) -> SweepPoint:
    """One (delta, itr) cell: aggregate `repetitions` seeded runs."""
    cell = with_dvfs_and_itr(config, delta, itr.ticks)
    per_rep: list[dict[str, float]] = []
    for rep in range(grid.repetitions):
        seeded = replace(cell, seed=grid.seed_base + rep)
        try:
            res = simulate(seeded, workload)
        except OverloadError as e:
            raise SweepError(delta, itr.ticks, e) from e
        per_rep.append(_result_metrics(res))
    names = per_rep[0].keys()
    stats = {name: MetricStats.of([m[name] for m in per_rep]) for name in names}
    return SweepPoint(delta=delta, itr_ticks=itr.ticks,
                      workload_kind=workload.kind, metrics=stats)


def run_sweep(grid: SweepGrid, config_template: SimConfig,
              workload: WorkloadSpec) -> list[SweepPoint]:
    """Evaluate every (delta, itr) pair; row-major in grid order."""
    return [run_cell(config_template, workload, grid, d, itr)
            for d in grid.delta_values for itr in grid.itr_values]


# --- frontier and markers ----------------------------------------------------

def pareto_front(points, objectives: tuple[str, str] | None = None) -> list[SweepPoint]:
    """Points not strictly dominated in (latency-like, energy-like) metrics.

    A point is dominated when another is <= in both objectives and < in at
    least one; exact duplicates survive.  Output sorted by the first
    objective.
    """
    points = list(points)
    if not points:
        raise ValueError("pareto_front needs at least one point")
    if objectives is None:
        x_name, y_name = points[0].performance_metric, "total_energy_j"
    else:
        x_name, y_name = objectives

    order = sorted(range(len(points)),
                   key=lambda i: (points[i].metric(x_name), points[i].metric(y_name)))
    front: list[SweepPoint] = []
    best_prev = float("inf")   # best y among strictly smaller x
    i = 0
    while i < len(order):
        j = i
        x_here = points[order[i]].metric(x_name)
        group = []
        while j < len(order) and points[order[j]].metric(x_name) == x_here:
            group.append(order[j])
            j += 1
        y_min = min(points[g].metric(y_name) for g in group)
        if y_min < best_prev:
            front.extend(g for g in group if points[g].metric(y_name) == y_min)
            best_prev = y_min
        i = j
    return [points[g] for g in sorted(
        front, key=lambda g: (points[g].metric(x_name), points[g].metric(y_name)))]


@dataclass(frozen=True)
class Markers:
    min_energy: SweepPoint
    min_latency: SweepPoint
    best_efficiency: SweepPoint | None  # closed loop only


def _argmin(points, name: str) -> SweepPoint:
    # ties broken by lower energy, then lower dvfs, then lower itr
    return min(points, key=lambda p: (p.metric(name), p.total_energy_j,
                                      p.delta, p.itr_ticks))


def find_markers(points, workload_kind: str | None = None) -> Markers:
    points = list(points)
    if not points:
        raise ValueError("find_markers needs at least one point")
    kind = workload_kind or points[0].workload_kind
    perf = "p99_latency_us" if kind == "open" else "completion_time_us"
    best_eff = None
    if kind == "closed":
        best_eff = _argmin(points, "energy_time_product_js")
    return Markers(min_energy=_argmin(points, "total_energy_j"),
                   min_latency=_argmin(points, perf),
                   best_efficiency=best_eff)


@dataclass(frozen=True)
class Improvement:
    """a versus baseline b: speedup factor b/a and percent savings (b-a)/b."""

    factor: float
    percent_savings: float


def relative_improvement(point_a: SweepPoint, point_b: SweepPoint,
                         metric: str) -> Improvement:
    a = point_a.metric(metric)
    b = point_b.metric(metric)
    if a == 0.0 or b == 0.0:
        raise ZeroDivisionError(f"cannot compare {metric} with a zero value")
    return Improvement(factor=b / a, percent_savings=(b - a) / b * 100.0)


# --- persistence ---------------------------------------------------------------

def write_sweep_file(fileobj, points, grid: SweepGrid, config: SimConfig,
                     workload: WorkloadSpec) -> None:
    from .config import dump_sim_config, dump_sweep_grid, dump_workload
    header = {
        "kind": "sweep-header",
        "schema_version": SWEEP_SCHEMA_VERSION,
        "workload_kind": workload.kind,
        "grid": dump_sweep_grid(grid),
        "sim": dump_sim_config(config),
        "workload": dump_workload(workload),
    }
    fileobj.write(json.dumps(header, separators=(",", ":")) + "\n")
    for p in points:
        fileobj.write(json.dumps(p.to_json_obj(), separators=(",", ":")) + "\n")


@dataclass
class SweepFile:
    workload_kind: str
    grid: dict
    sim: dict
    workload: dict
    points: list[SweepPoint]


def read_sweep_file(source) -> SweepFile:
    if isinstance(source, (str, bytes)):
        text = source.decode() if isinstance(source, bytes) else source
    else:
        text = source.read()
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines:
        raise ValueError("empty sweep file")
    header = json.loads(lines[0])
    if header.get("kind") != "sweep-header":
        raise ValueError("missing sweep-header line")
    if header.get("schema_version") != SWEEP_SCHEMA_VERSION:
        raise ValueError(f"unsupported sweep schema_version {header.get('schema_version')!r}")
    points = []
    for line in lines[1:]:
        obj = json.loads(line)
        if obj.get("kind") != "sweep-point":
            raise ValueError(f"unexpected record kind {obj.get('kind')!r}")
        points.append(SweepPoint.from_json_obj(obj))
    return SweepFile(workload_kind=header["workload_kind"], grid=header["grid"],
                     sim=header["sim"], workload=header["workload"], points=points)


def read_sweep_path(path) -> SweepFile:
    with open(path, "r", encoding="utf-8") as f:
        return read_sweep_file(f)
