"""Inference of the time/power scaling parameters from measured points.

Two laws, fit separately:

    t_work = work_scale / delta**(1+alpha)      (log-log linear least squares)
    P_work = p_static + p_dyn * delta**(2+beta) (profiled: linear in the two
                                                 powers given beta, with a
                                                 bracketed search over beta)

Samples pair a DVFS setting with an observed latency, a busy-interval mean
power, and a known detection time (detection shifts latency and is not
identifiable from these two laws alone, so it must be supplied).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class FitError(ValueError):
    pass


class FitRangeError(FitError):
    """A fitted exponent landed outside its admissible range."""


@dataclass(frozen=True)
class FitSample:
    delta: float
    observed_latency_s: float
    observed_mean_power_w: float
    known_t_detect_s: float

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise FitError(f"sample delta must be in (0, 1], got {self.delta}")
        if not (self.observed_latency_s > 0.0):
            raise FitError("observed latency must be > 0")
        if not (self.observed_mean_power_w > 0.0):
            raise FitError("observed mean power must be > 0")
        if self.known_t_detect_s < 0.0:
            raise FitError("detection time must be >= 0")


@dataclass(frozen=True)
class FitResult:
    alpha_hat: float
    beta_hat: float
    work_scale_hat: float
    p_static_hat: float
    p_dyn_hat: float
    time_residual: float
    power_residual: float
    sample_count: int
    powers_clamped: bool = False

    def __post_init__(self):
        if self.time_residual < 0.0 or self.power_residual < 0.0:
            raise FitError("residuals must be >= 0")
        if not (self.alpha_hat > -1.0):
            raise FitRangeError(f"alpha_hat {self.alpha_hat} outside (-1, inf)")
        if not (self.beta_hat > -2.0):
            raise FitRangeError(f"beta_hat {self.beta_hat} outside (-2, inf)")

    def to_json_obj(self) -> dict:
        return {
            "kind": "fit-report",
            "schema_version": 1,
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "work_scale_hat_s": self.work_scale_hat,
            "p_static_hat_w": self.p_static_hat,
            "p_dyn_hat_w": self.p_dyn_hat,
            "time_residual": self.time_residual,
            "power_residual": self.power_residual,
            "sample_count": self.sample_count,
            "powers_clamped": self.powers_clamped,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FitResult":
        if obj.get("kind") != "fit-report" or obj.get("schema_version") != 1:
            raise FitError("not a version-1 fit report")
        return cls(alpha_hat=obj["alpha_hat"], beta_hat=obj["beta_hat"],
                   work_scale_hat=obj["work_scale_hat_s"],
                   p_static_hat=obj["p_static_hat_w"], p_dyn_hat=obj["p_dyn_hat_w"],
                   time_residual=obj["time_residual"],
                   power_residual=obj["power_residual"],
                   sample_count=obj["sample_count"],
                   powers_clamped=obj["powers_clamped"])


def _distinct_deltas(samples) -> int:
    return len({s.delta for s in samples})


def fit_time_law(samples) -> tuple[float, float, float]:
    """(alpha_hat, work_scale_hat, rms log residual) from latency samples.

    Least squares of log(t_work) on log(delta): the slope is -(1+alpha),
    the intercept log(work_scale).
    """
    samples = list(samples)
    if _distinct_deltas(samples) < 3:
        raise FitError("time-law fit needs >= 3 samples at distinct delta values")
    t_work = np.array([s.observed_latency_s - s.known_t_detect_s for s in samples])
    if np.any(t_work <= 0.0):
        raise FitError("nonpositive work time: latency must exceed detection time")
    x = np.log(np.array([s.delta for s in samples]))
    y = np.log(t_work)
    slope, intercept = np.polyfit(x, y, 1)
    alpha_hat = -slope - 1.0
    # the boundary itself is degenerate (work time flat in delta); catch
    # float-noise slopes that land within an ulp of it
    if not (alpha_hat > -1.0 + 1e-9) or not math.isfinite(alpha_hat):
        raise FitRangeError(
            f"fitted alpha {alpha_hat} at or outside the (-1, inf) boundary; "
            "work time does not decrease with processor speed")
    resid = y - (slope * x + intercept)
    return float(alpha_hat), float(np.exp(intercept)), float(np.sqrt(np.mean(resid ** 2)))


def _power_design_fit(deltas: np.ndarray, watts: np.ndarray, beta: float):
    """Best nonnegative (p_static, p_dyn) for a fixed beta, plus RMS residual."""
    basis = deltas ** (2.0 + beta)
    X = np.column_stack([np.ones_like(deltas), basis])
    coef, *_ = np.linalg.lstsq(X, watts, rcond=None)
    ps, pd = float(coef[0]), float(coef[1])
    clamped = False
    if ps < 0.0 or pd < 0.0:
        clamped = True
        # exact nonnegative solution for two parameters: the better of the
        # two single-component fits
        pd_only = float(basis @ watts / (basis @ basis))
        ps_only = float(np.mean(watts))
        cand = []
        if pd_only >= 0.0:
            cand.append((0.0, pd_only))
        if ps_only >= 0.0:
            cand.append((ps_only, 0.0))
        cand.append((0.0, 0.0))
        best = None
        for c_ps, c_pd in cand:
            r = c_ps + c_pd * basis - watts
            rms = float(np.sqrt(np.mean(r ** 2)))
            if best is None or rms < best[0]:
                best = (rms, c_ps, c_pd)
        return best[1], best[2], best[0], clamped
    r = ps + pd * basis - watts
    return ps, pd, float(np.sqrt(np.mean(r ** 2))), clamped


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def fit_power_law(samples, beta_bracket=(-1.9, 4.0),
                  tol: float = 1e-6) -> tuple[float, float, float, float, bool]:
    """(beta_hat, p_static_hat, p_dyn_hat, rms residual, clamped).

    Profiled fit: for each candidate beta the two powers come from linear
    least squares (clamped to zero when unconstrained coefficients go
    negative); beta itself is located by a coarse scan over the bracket
    plus golden-section refinement.  The returned beta's residual is never
    worse than any candidate evaluated during the search.
    """
    samples = list(samples)
    if _distinct_deltas(samples) < 4:
        raise FitError("power-law fit needs >= 4 samples at distinct delta values")
    deltas = np.array([s.delta for s in samples])
    watts = np.array([s.observed_mean_power_w for s in samples])
    lo, hi = beta_bracket
    if not (lo > -2.0 and hi > lo):
        raise FitError(f"beta bracket must sit inside (-2, inf), got {beta_bracket}")

    evaluated: list[tuple[float, float]] = []

    def objective(beta: float) -> float:
        _, _, rms, _ = _power_design_fit(deltas, watts, beta)
        evaluated.append((rms, beta))
        return rms

    n_scan = 57
    grid = np.linspace(lo, hi, n_scan)
    vals = [objective(b) for b in grid]
    j = int(np.argmin(vals))
    a = grid[max(0, j - 1)]
    b = grid[min(n_scan - 1, j + 1)]

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = objective(d)
    objective(0.5 * (a + b))
    best_rms, best_beta = min(evaluated)
    ps, pd, rms, clamped = _power_design_fit(deltas, watts, best_beta)
    return float(best_beta), ps, pd, rms, clamped


def fit_samples(samples) -> FitResult:
    """Run both laws over one sample set."""
    samples = list(samples)
    alpha_hat, scale, t_res = fit_time_law(samples)
    beta_hat, ps, pd, p_res, clamped = fit_power_law(samples)
    return FitResult(alpha_hat=alpha_hat, beta_hat=beta_hat, work_scale_hat=scale,
                     p_static_hat=ps, p_dyn_hat=pd, time_residual=t_res,
                     power_residual=p_res, sample_count=len(samples),
                     powers_clamped=clamped)


def samples_from_sweep(points) -> list[FitSample]:
    """Convert sweep points into fit samples.

    All points must share one interrupt-throttle setting: throttling adds
    detection delay, which would confound the time law.  Mean busy power
    is total energy over active (busy + detection + spin) time.
    """
    points = list(points)
    if not points:
        raise FitError("no sweep points to fit")
    itrs = {p.itr_ticks for p in points}
    if len(itrs) > 1:
        raise FitError(f"sweep mixes interrupt-throttle settings {sorted(itrs)}; "
                       "fit requires a single itr column")
    out = []
    for p in points:
        active_s = p.metric("active_time_us") * 1e-6
        if active_s <= 0.0:
            raise FitError(f"point at delta={p.delta} has no active time")
        out.append(FitSample(
            delta=p.delta,
            observed_latency_s=p.metric("mean_latency_us") * 1e-6,
            observed_mean_power_w=p.metric("total_energy_j") / active_s,
            known_t_detect_s=p.metric("mean_detect_us") * 1e-6))
    return out


def fit_scenario(points, workload_kind: str | None = None) -> FitResult:
    """Fit both laws to a sweep taken at a fixed throttle setting."""
    samples = samples_from_sweep(points)
    if _distinct_deltas(samples) < 4:
        raise FitError("scenario fit needs >= 4 distinct delta values in the sweep")
    return fit_samples(samples)
