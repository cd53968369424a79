"""Analytic model of per-request time and energy under DVFS.

The model decomposes the interval between two request arrivals into
detection, work, and quiescent phases and attaches a power regime to each:

    dt        = t_detect + t_work + t_q            (= 1/lambda, open loop)
    t_work    = t_osreq + t_app + t_idlepolicy
    t_latency = t_detect + t_work
    E         = P_detect*t_detect + P_work*t_work + P_q*t_q

DVFS enters through a normalized speed setting delta in (0, 1] with two
power-law sensitivities:

    t_work = work_coeff * instructions / delta**(1 + alpha)
    P_work = p_static + p_dyn * delta**(2 + beta)

Normalized curves divide by dt, assigning a fraction f_detect of the
interval to detection and a maximal fraction f_work_max to work:

    t_latency/dt  = f_detect + f_work_max / delta**(1 + alpha)
    E/(1W * dt)   = P_work * (t_latency/dt)     [detect tracks work, P_q = 0]

Everything here is deterministic; stochastic effects belong to the
simulator (see eplab.engine).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass


def _check_delta(delta: float) -> None:
    if not (delta > 0.0) or math.isnan(delta):
        raise ValueError(f"dvfs setting must be > 0, got {delta}")


@dataclass(frozen=True)
class DvfsSetting:
    """Normalized processor speed, as a fraction of maximum frequency."""

    delta: float

    def __post_init__(self):
        _check_delta(self.delta)
        if self.delta > 1.0:
            raise ValueError(f"dvfs setting must be <= 1, got {self.delta}")


@dataclass(frozen=True)
class ScalingExponents:
    """Power-law sensitivities of work time (alpha) and work power (beta)."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha <= -1.0:
            raise ValueError(f"alpha must be finite and > -1, got {self.alpha}")
        if not math.isfinite(self.beta) or self.beta <= -2.0:
            raise ValueError(f"beta must be finite and > -2, got {self.beta}")


@dataclass(frozen=True)
class PowerModel:
    """The three power regimes: detection, work, quiescent.

    Work power is p_static + p_dyn * delta**(2+beta).  When
    detect_tracks_work is set the detection phase is billed at the
    DVFS-dependent work power instead of the fixed p_detect.
    """

    p_detect: float = 0.0
    p_static: float = 10.0
    p_dyn: float = 20.0
    p_quiescent: float = 0.0
    detect_tracks_work: bool = True

    def __post_init__(self):
        for name in ("p_detect", "p_static", "p_dyn", "p_quiescent"):
            v = getattr(self, name)
            if not (v >= 0.0):
                raise ValueError(f"{name} must be >= 0, got {v}")


@dataclass(frozen=True)
class TimelineBreakdown:
    """Per-request stage durations, in seconds."""

    t_detect: float = 0.0
    t_osreq: float = 0.0
    t_app: float = 0.0
    t_idlepolicy: float = 0.0
    t_q: float = 0.0

    def __post_init__(self):
        for name in ("t_detect", "t_osreq", "t_app", "t_idlepolicy", "t_q"):
            v = getattr(self, name)
            if not (v >= 0.0):
                raise ValueError(f"{name} must be >= 0, got {v}")

    @property
    def t_work(self) -> float:
        return self.t_osreq + self.t_app + self.t_idlepolicy

    @property
    def t_latency(self) -> float:
        return self.t_detect + self.t_work

    @property
    def delta_t(self) -> float:
        return self.t_latency + self.t_q


@dataclass(frozen=True)
class AnalyticScenario:
    """A workload point for the analytic model.

    lam is the arrival rate (requests/second).  work_coeff and
    instructions give absolute work time; f_detect and f_work_max give the
    normalized fractions used by the dimensionless curves.
    """

    lam: float = 1000.0
    work_coeff: float = 1e-9
    instructions: float = 1e6
    f_detect: float = 0.1
    f_work_max: float = 0.5
    exponents: ScalingExponents = ScalingExponents()
    power: PowerModel = PowerModel()

    def __post_init__(self):
        if not (self.lam > 0.0):
            raise ValueError(f"arrival rate must be > 0, got {self.lam}")
        if not (self.work_coeff >= 0.0):
            raise ValueError(f"work_coeff must be >= 0, got {self.work_coeff}")
        if not (self.instructions >= 0.0):
            raise ValueError(f"instructions must be >= 0, got {self.instructions}")
        if not (0.0 <= self.f_detect <= 1.0):
            raise ValueError(f"f_detect must be in [0, 1], got {self.f_detect}")
        if not (0.0 <= self.f_work_max <= 1.0):
            raise ValueError(f"f_work_max must be in [0, 1], got {self.f_work_max}")


@dataclass(frozen=True)
class CurvePoint:
    """One DVFS setting on a normalized energy-vs-latency curve."""

    delta: float
    norm_latency: float
    norm_energy: float


def work_time(work_coeff: float, instructions: float, delta: float, alpha: float) -> float:
    """Seconds of work: work_coeff * instructions / delta**(1+alpha)."""
    _check_delta(delta)
    return work_coeff * instructions / delta ** (1.0 + alpha)


def work_power(power: PowerModel, delta: float, beta: float) -> float:
    """Watts drawn while working: p_static + p_dyn * delta**(2+beta)."""
    _check_delta(delta)
    return power.p_static + power.p_dyn * delta ** (2.0 + beta)


def detect_power(power: PowerModel, delta: float, beta: float) -> float:
    """Watts drawn during detection, honoring detect_tracks_work."""
    if power.detect_tracks_work:
        return work_power(power, delta, beta)
    return power.p_detect


def quiescent_time(lam: float, t_detect: float, t_work: float) -> float:
    """Positive part of the interarrival gap left after detection and work."""
    if not (lam > 0.0):
        raise ValueError(f"arrival rate must be > 0, got {lam}")
    if t_detect < 0.0 or t_work < 0.0:
        raise ValueError("stage durations must be >= 0")
    return max(0.0, 1.0 / lam - (t_detect + t_work))


def request_energy(power: PowerModel, breakdown: TimelineBreakdown,
                   delta: float, beta: float) -> float:
    """Joules for one request: one power regime per timeline phase."""
    p_work = work_power(power, delta, beta)
    p_det = p_work if power.detect_tracks_work else power.p_detect
    return (p_det * breakdown.t_detect
            + p_work * breakdown.t_work
            + power.p_quiescent * breakdown.t_q)


def normalized_latency(scenario: AnalyticScenario, delta: float) -> float:
    """t_latency/dt = f_detect + f_work_max / delta**(1+alpha)."""
    _check_delta(delta)
    return scenario.f_detect + scenario.f_work_max / delta ** (1.0 + scenario.exponents.alpha)


def normalized_energy(scenario: AnalyticScenario, delta: float) -> float:
    """E/(1W*dt) with the scenario's three power regimes.

    The work fraction f_work_max/delta**(1+alpha) is billed at work power,
    the detection fraction at detection power (which equals work power
    when detect_tracks_work is set), and whatever is left of the interval
    at quiescent power.  The quiescent fraction clamps at zero once
    latency fills the interval.
    """
    nl = normalized_latency(scenario, delta)
    p_work = work_power(scenario.power, delta, scenario.exponents.beta)
    p_det = p_work if scenario.power.detect_tracks_work else scenario.power.p_detect
    f_work = nl - scenario.f_detect
    f_q = max(0.0, 1.0 - nl)
    return p_det * scenario.f_detect + p_work * f_work + scenario.power.p_quiescent * f_q


def scenario_breakdown(scenario: AnalyticScenario, delta: float) -> TimelineBreakdown:
    """Absolute-unit timeline for one request of the scenario at delta.

    Detection takes f_detect of the interarrival gap; work time comes from
    the absolute law work_coeff * instructions / delta**(1+alpha) and is
    carried under t_app (t_osreq and t_idlepolicy fold into it here).
    """
    dt = 1.0 / scenario.lam
    t_detect = scenario.f_detect * dt
    t_work = work_time(scenario.work_coeff, scenario.instructions, delta,
                       scenario.exponents.alpha)
    t_q = quiescent_time(scenario.lam, t_detect, t_work)
    return TimelineBreakdown(t_detect=t_detect, t_app=t_work, t_q=t_q)


def curve_sweep(scenario: AnalyticScenario, deltas) -> list[CurvePoint]:
    """Evaluate the normalized curves over a DVFS grid, in grid order."""
    deltas = list(deltas)
    if not deltas:
        raise ValueError("delta grid must be nonempty")
    return [CurvePoint(d, normalized_latency(scenario, d), normalized_energy(scenario, d))
            for d in deltas]


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def optimal_delta(scenario: AnalyticScenario, delta_range=(0.05, 1.0),
                  tolerance: float = 1e-6) -> float:
    """DVFS setting minimizing normalized energy over delta_range.

    Scans a coarse grid to locate the global basin (the curve need not be
    unimodal for arbitrary exponents), then refines with golden-section
    until the bracket is narrower than `tolerance`.
    """
    lo, hi = delta_range
    if not (0.0 < lo <= hi <= 1.0):
        raise ValueError(f"delta range must satisfy 0 < lo <= hi <= 1, got {delta_range}")
    if not (tolerance > 0.0):
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    if lo == hi:
        return lo

    f = lambda d: normalized_energy(scenario, d)
    n = 512
    step = (hi - lo) / n
    best_x, best_v = lo, f(lo)
    for i in range(1, n + 1):
        x = lo + i * step
        v = f(x)
        if v < best_v:
            best_x, best_v = x, v
    a = max(lo, best_x - step)
    b = min(hi, best_x + step)

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tolerance:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    mid = 0.5 * (a + b)
    # never return a point worse than the best one actually evaluated
    candidates = [(f(mid), mid), (fc, c), (fd, d), (best_v, best_x)]
    return min(candidates)[1]


def write_curve_csv(points, fileobj) -> None:
    """Write curve points as CSV with header delta,norm_latency,norm_energy."""
    w = csv.writer(fileobj, lineterminator="\n")
    w.writerow(["delta", "norm_latency", "norm_energy"])
    for p in points:
        w.writerow([repr(p.delta), repr(p.norm_latency), repr(p.norm_energy)])


def read_curve_csv(fileobj) -> list[CurvePoint]:
    """Inverse of write_curve_csv."""
    r = csv.reader(fileobj)
    header = next(r, None)
    if header != ["delta", "norm_latency", "norm_energy"]:
        raise ValueError(f"unexpected curve CSV header: {header}")
    return [CurvePoint(float(a), float(b), float(c)) for a, b, c in r]
