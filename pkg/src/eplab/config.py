"""Shared configuration file schema for the CLI, service, and library.

One JSON document drives every subcommand.  Top-level sections are all
optional; each command checks for the ones it needs:

    {
      "schema_version": 1,
      "scenario":  { ... analytic model scenario ... },
      "sim":       { ... machine/OS configuration ... },
      "workload":  { ... open or closed loop demand ... },
      "sweep":     { ... dvfs x itr grid ... }
    }

Parsing is strict: unknown keys anywhere are rejected with the offending
path, so typos never silently fall back to defaults.  dump_* functions
emit the canonical dict form used for content digests and artifact
headers.
"""

from __future__ import annotations

import json
from dataclasses import asdict

from .engine import (
    CState,
    CStateModel,
    DetectionMode,
    IdlePolicy,
    ItrSetting,
    NicModel,
    OS_PRESETS,
    OsProfile,
    SimConfig,
    StopCondition,
    WorkloadSpec,
    default_cstates,
)
from .model import AnalyticScenario, PowerModel, ScalingExponents

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


def _expect_obj(value, path):
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    return value


def _take(obj: dict, path: str, known: set[str]):
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(path, f"unknown keys {sorted(unknown)} (known: {sorted(known)})")


def _number(obj, key, path, default=None, required=False):
    if key not in obj:
        if required:
            raise ConfigError(f"{path}.{key}", "required")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    return float(v)


def _integer(obj, key, path, default=None, required=False):
    if key not in obj:
        if required:
            raise ConfigError(f"{path}.{key}", "required")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    return v


def _string(obj, key, path, default=None, choices=None):
    if key not in obj:
        return default
    v = obj[key]
    if not isinstance(v, str):
        raise ConfigError(f"{path}.{key}", f"expected a string, got {v!r}")
    if choices and v not in choices:
        raise ConfigError(f"{path}.{key}", f"expected one of {sorted(choices)}, got {v!r}")
    return v


def _wrap(path):
    """Re-raise dataclass validation errors with the config path attached."""
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, ValueError) \
                    and not isinstance(exc, ConfigError):
                raise ConfigError(path, str(exc)) from exc
            return False
    return _Ctx()


# --- power / exponents (shared by scenario and sim) -------------------------

_POWER_KEYS = {"p_detect_w", "p_static_w", "p_dyn_w", "p_quiescent_w",
               "detect_tracks_work"}


def parse_power(obj, path="power") -> PowerModel:
    obj = _expect_obj(obj, path)
    _take(obj, path, _POWER_KEYS)
    flag = obj.get("detect_tracks_work", True)
    if not isinstance(flag, bool):
        raise ConfigError(f"{path}.detect_tracks_work", "expected a boolean")
    with _wrap(path):
        return PowerModel(
            p_detect=_number(obj, "p_detect_w", path, 0.0),
            p_static=_number(obj, "p_static_w", path, 10.0),
            p_dyn=_number(obj, "p_dyn_w", path, 20.0),
            p_quiescent=_number(obj, "p_quiescent_w", path, 0.0),
            detect_tracks_work=flag)


def dump_power(p: PowerModel) -> dict:
    return {"p_detect_w": p.p_detect, "p_static_w": p.p_static, "p_dyn_w": p.p_dyn,
            "p_quiescent_w": p.p_quiescent, "detect_tracks_work": p.detect_tracks_work}


# --- analytic scenario -------------------------------------------------------

_SCENARIO_KEYS = {"lambda_per_s", "work_coeff_s", "instructions", "f_detect",
                  "f_work_max", "alpha", "beta", "power"}


def parse_scenario(obj, path="scenario") -> AnalyticScenario:
    obj = _expect_obj(obj, path)
    _take(obj, path, _SCENARIO_KEYS)
    with _wrap(path):
        exponents = ScalingExponents(alpha=_number(obj, "alpha", path, 0.0),
                                     beta=_number(obj, "beta", path, 0.0))
        power = parse_power(obj.get("power", {}), f"{path}.power")
        return AnalyticScenario(
            lam=_number(obj, "lambda_per_s", path, 1000.0),
            work_coeff=_number(obj, "work_coeff_s", path, 1e-9),
            instructions=_number(obj, "instructions", path, 1e6),
            f_detect=_number(obj, "f_detect", path, 0.1),
            f_work_max=_number(obj, "f_work_max", path, 0.5),
            exponents=exponents, power=power)


def dump_scenario(s: AnalyticScenario) -> dict:
    return {"lambda_per_s": s.lam, "work_coeff_s": s.work_coeff,
            "instructions": s.instructions, "f_detect": s.f_detect,
            "f_work_max": s.f_work_max, "alpha": s.exponents.alpha,
            "beta": s.exponents.beta, "power": dump_power(s.power)}


# --- workload ----------------------------------------------------------------

_WORKLOAD_KEYS = {"kind", "lambda_per_s", "arrival", "iterations",
                  "client_think_us", "request_bytes", "reply_bytes",
                  "app_instructions"}


def parse_workload(obj, path="workload") -> WorkloadSpec:
    obj = _expect_obj(obj, path)
    _take(obj, path, _WORKLOAD_KEYS)
    kind = _string(obj, "kind", path, choices={"open", "closed"})
    if kind is None:
        raise ConfigError(f"{path}.kind", "required (open or closed)")
    with _wrap(path):
        return WorkloadSpec(
            kind=kind,
            lam=_number(obj, "lambda_per_s", path, 1000.0),
            arrival_process=_string(obj, "arrival", path, "deterministic",
                                    choices={"deterministic", "poisson"}),
            iterations=_integer(obj, "iterations", path, 1000),
            client_think_us=_number(obj, "client_think_us", path, 0.0),
            request_size=_integer(obj, "request_bytes", path, 64),
            reply_size=_integer(obj, "reply_bytes", path, 64),
            app_instructions=_number(obj, "app_instructions", path, 10000.0))


def dump_workload(w: WorkloadSpec) -> dict:
    return {"kind": w.kind, "lambda_per_s": w.lam, "arrival": w.arrival_process,
            "iterations": w.iterations, "client_think_us": w.client_think_us,
            "request_bytes": w.request_size, "reply_bytes": w.reply_size,
            "app_instructions": w.app_instructions}


# --- sim config ----------------------------------------------------------------

_SIM_KEYS = {"seed", "delta", "alpha", "beta", "power", "base_ips", "detection",
             "idle", "cstates", "nic", "os", "stop"}
_DETECTION_KEYS = {"mode", "poll_budget"}
_IDLE_KEYS = {"policy", "thresholds_us"}
_CSTATE_KEYS = {"name", "exit_latency_us", "idle_power_w"}
_NIC_KEYS = {"bandwidth_bytes_per_us", "mtu_bytes", "itr_ticks", "device_poll_batch"}
_OS_KEYS = {"preset", "os_req_instructions", "os_reply_instructions",
            "unwind_instructions", "interrupt_overhead_instructions",
            "async_work_rate", "kernel_user_copy_per_byte", "poll_check_instructions"}
_STOP_KEYS = {"requests", "duration_us"}


def parse_detection(obj, path) -> DetectionMode:
    obj = _expect_obj(obj, path)
    _take(obj, path, _DETECTION_KEYS)
    with _wrap(path):
        return DetectionMode(
            kind=_string(obj, "mode", path, "interrupt",
                         choices={"interrupt", "hybrid", "poll"}),
            poll_budget=_integer(obj, "poll_budget", path, 256))


def parse_idle(obj, path) -> IdlePolicy:
    obj = _expect_obj(obj, path)
    _take(obj, path, _IDLE_KEYS)
    thresholds = obj.get("thresholds_us")
    if thresholds is not None:
        if not isinstance(thresholds, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in thresholds):
            raise ConfigError(f"{path}.thresholds_us", "expected a list of numbers")
        thresholds = tuple(float(x) for x in thresholds)
    with _wrap(path):
        return IdlePolicy(
            kind=_string(obj, "policy", path, "always_deepest",
                         choices={"always_deepest", "latency_aware", "poll"}),
            thresholds_us=thresholds)


def parse_cstates(obj, path) -> CStateModel:
    if not isinstance(obj, list) or not obj:
        raise ConfigError(path, "expected a nonempty list of c-states")
    states = []
    for i, st in enumerate(obj):
        st = _expect_obj(st, f"{path}[{i}]")
        _take(st, f"{path}[{i}]", _CSTATE_KEYS)
        name = _string(st, "name", f"{path}[{i}]")
        if not name:
            raise ConfigError(f"{path}[{i}].name", "required")
        states.append(CState(
            name=name,
            exit_latency_us=_number(st, "exit_latency_us", f"{path}[{i}]", required=True),
            idle_power_w=_number(st, "idle_power_w", f"{path}[{i}]", required=True)))
    with _wrap(path):
        return CStateModel(tuple(states))


def parse_nic(obj, path) -> NicModel:
    obj = _expect_obj(obj, path)
    _take(obj, path, _NIC_KEYS)
    with _wrap(path):
        return NicModel(
            wire_bandwidth=_number(obj, "bandwidth_bytes_per_us", path, 1250.0),
            mtu=_integer(obj, "mtu_bytes", path, 1500),
            itr=ItrSetting(_integer(obj, "itr_ticks", path, 0)),
            device_poll_batch=_integer(obj, "device_poll_batch", path, 64))


def parse_os(obj, path) -> OsProfile:
    obj = _expect_obj(obj, path)
    _take(obj, path, _OS_KEYS)
    preset_name = _string(obj, "preset", path, choices=set(OS_PRESETS))
    base = OS_PRESETS[preset_name] if preset_name else OsProfile()
    fields = {
        "os_req_instructions": base.os_req_instructions,
        "os_reply_instructions": base.os_reply_instructions,
        "unwind_instructions": base.unwind_instructions,
        "interrupt_overhead_instructions": base.interrupt_overhead_instructions,
        "async_work_rate": base.async_work_rate,
        "kernel_user_copy_per_byte": base.kernel_user_copy_per_byte,
        "poll_check_instructions": base.poll_check_instructions,
    }
    for key in fields:
        if key in obj:
            fields[key] = _number(obj, key, path)
    with _wrap(path):
        return OsProfile(**fields)


def parse_stop(obj, path) -> StopCondition:
    obj = _expect_obj(obj, path)
    _take(obj, path, _STOP_KEYS)
    with _wrap(path):
        return StopCondition(requests=_integer(obj, "requests", path),
                             duration_us=_number(obj, "duration_us", path))


def parse_sim_config(obj, path="sim") -> SimConfig:
    obj = _expect_obj(obj, path)
    _take(obj, path, _SIM_KEYS)
    with _wrap(path):
        exponents = ScalingExponents(alpha=_number(obj, "alpha", path, 0.0),
                                     beta=_number(obj, "beta", path, 0.0))
        return SimConfig(
            seed=_integer(obj, "seed", path, 0),
            dvfs=_number(obj, "delta", path, 1.0),
            exponents=exponents,
            power=parse_power(obj.get("power", {}), f"{path}.power"),
            base_ips=_number(obj, "base_ips", path, 1e9),
            detection=parse_detection(obj.get("detection", {}), f"{path}.detection"),
            idle=parse_idle(obj.get("idle", {}), f"{path}.idle"),
            cstates=(parse_cstates(obj["cstates"], f"{path}.cstates")
                     if "cstates" in obj else default_cstates()),
            nic=parse_nic(obj.get("nic", {}), f"{path}.nic"),
            os=parse_os(obj.get("os", {}), f"{path}.os"),
            stop=(parse_stop(obj["stop"], f"{path}.stop")
                  if "stop" in obj else StopCondition(requests=1000)))


def dump_sim_config(c: SimConfig) -> dict:
    idle = {"policy": c.idle.kind}
    if c.idle.thresholds_us is not None:
        idle["thresholds_us"] = list(c.idle.thresholds_us)
    stop = {}
    if c.stop.requests is not None:
        stop["requests"] = c.stop.requests
    if c.stop.duration_us is not None:
        stop["duration_us"] = c.stop.duration_us
    return {
        "seed": c.seed,
        "delta": c.dvfs,
        "alpha": c.exponents.alpha,
        "beta": c.exponents.beta,
        "power": dump_power(c.power),
        "base_ips": c.base_ips,
        "detection": {"mode": c.detection.kind, "poll_budget": c.detection.poll_budget},
        "idle": idle,
        "cstates": [asdict(s) for s in c.cstates.states],
        "nic": {"bandwidth_bytes_per_us": c.nic.wire_bandwidth, "mtu_bytes": c.nic.mtu,
                "itr_ticks": c.nic.itr.ticks, "device_poll_batch": c.nic.device_poll_batch},
        "os": {k: v for k, v in asdict(c.os).items()},
        "stop": stop,
    }


# --- sweep grid ----------------------------------------------------------------

_SWEEP_KEYS = {"delta_values", "itr_ticks", "repetitions", "seed_base"}


def parse_sweep_grid(obj, path="sweep"):
    from .sweep import SweepGrid  # sweep imports engine; keep this lazy
    obj = _expect_obj(obj, path)
    _take(obj, path, _SWEEP_KEYS)
    deltas = obj.get("delta_values")
    ticks = obj.get("itr_ticks")
    if not isinstance(deltas, list) or not deltas:
        raise ConfigError(f"{path}.delta_values", "expected a nonempty list of numbers")
    if not isinstance(ticks, list) or not ticks:
        raise ConfigError(f"{path}.itr_ticks", "expected a nonempty list of integers")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in deltas):
        raise ConfigError(f"{path}.delta_values", "expected numbers")
    if not all(isinstance(x, int) and not isinstance(x, bool) for x in ticks):
        raise ConfigError(f"{path}.itr_ticks", "expected integers")
    with _wrap(path):
        return SweepGrid(delta_values=tuple(float(d) for d in deltas),
                         itr_values=tuple(ItrSetting(t) for t in ticks),
                         repetitions=_integer(obj, "repetitions", path, 10),
                         seed_base=_integer(obj, "seed_base", path, 0))


def dump_sweep_grid(g) -> dict:
    return {"delta_values": list(g.delta_values),
            "itr_ticks": [i.ticks for i in g.itr_values],
            "repetitions": g.repetitions, "seed_base": g.seed_base}


# --- whole document ----------------------------------------------------------

_TOP_KEYS = {"schema_version", "scenario", "sim", "workload", "sweep"}


class LabConfig:
    """Parsed top-level document; sections are None when absent."""

    def __init__(self, scenario=None, sim=None, workload=None, sweep=None):
        self.scenario = scenario
        self.sim = sim
        self.workload = workload
        self.sweep = sweep

    def require(self, section: str):
        value = getattr(self, section)
        if value is None:
            raise ConfigError(section, "section required for this command")
        return value


def parse_document(obj) -> LabConfig:
    obj = _expect_obj(obj, "<root>")
    _take(obj, "<root>", _TOP_KEYS)
    version = obj.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}")
    return LabConfig(
        scenario=parse_scenario(obj["scenario"]) if "scenario" in obj else None,
        sim=parse_sim_config(obj["sim"]) if "sim" in obj else None,
        workload=parse_workload(obj["workload"]) if "workload" in obj else None,
        sweep=parse_sweep_grid(obj["sweep"]) if "sweep" in obj else None)


def load_file(path) -> LabConfig:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError("<root>", f"invalid JSON: {e}") from e
    return parse_document(obj)
