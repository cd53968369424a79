"""Discrete-event simulator of one core serving network requests.

The timeline per request: NIC packet arrival -> interrupt-throttle gating
-> detection (interrupt, NAPI-style hybrid, or poll) -> request servicing
(OS receive path, application, OS reply path) -> reply transmission
overlapped with the stack unwind -> device check for already-arrived
packets -> idle policy (c-state sleep or spin).  DVFS stretches every
instruction-counted phase by delta**(1+alpha) and sets the busy power to
p_static + p_dyn * delta**(2+beta).

A run is deterministic: identical (config, workload, seed) produce
bit-identical results and byte-identical traces.  Arrival randomness (the
Poisson option) comes from a PCG64 generator seeded from the config; the
event loop itself draws nothing.

The hot loop lives in eplab.kernel and runs under numba unless
EPLAB_NO_NUMBA=1 selects the pure-Python path.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernel
from .model import PowerModel, ScalingExponents, work_power
from .tracelog import InterruptRecord, PeriodicSample, TraceHeader, TraceStream


class SimValidationError(ValueError):
    pass


class OverloadError(RuntimeError):
    """Open-loop arrival rate exceeds what the configuration can service."""

    def __init__(self, completed: int, pending: int):
        super().__init__(
            f"open-loop overload: backlog reached {pending} requests after "
            f"{completed} completions")
        self.completed = completed
        self.pending = pending


@dataclass(frozen=True)
class ItrSetting:
    """NIC interrupt throttle: minimum spacing of 2us x ticks; 0 disables."""

    ticks: int = 0

    def __post_init__(self):
        if self.ticks < 0 or self.ticks != int(self.ticks):
            raise SimValidationError(f"itr ticks must be a nonnegative integer, got {self.ticks}")

    @property
    def delay_us(self) -> float:
        return 2.0 * self.ticks


@dataclass(frozen=True)
class CState:
    name: str
    exit_latency_us: float
    idle_power_w: float


@dataclass(frozen=True)
class CStateModel:
    """Sleep states ordered shallow to deep."""

    states: tuple[CState, ...]

    def __post_init__(self):
        if not self.states:
            raise SimValidationError("at least one c-state is required")
        exits = [s.exit_latency_us for s in self.states]
        powers = [s.idle_power_w for s in self.states]
        if any(e < 0 for e in exits) or any(p < 0 for p in powers):
            raise SimValidationError("c-state latencies and powers must be >= 0")
        if any(a >= b for a, b in zip(exits, exits[1:])):
            raise SimValidationError("c-state exit latencies must strictly increase")
        if any(a <= b for a, b in zip(powers, powers[1:])):
            raise SimValidationError("c-state idle powers must strictly decrease")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.states)


def default_cstates() -> CStateModel:
    # documented assumptions, not measurements: shallow halt, mid, deep
    return CStateModel((
        CState("C1", exit_latency_us=2.0, idle_power_w=1.5),
        CState("C3", exit_latency_us=40.0, idle_power_w=0.6),
        CState("C7", exit_latency_us=120.0, idle_power_w=0.05),
    ))


@dataclass(frozen=True)
class IdlePolicy:
    """What the core does when no work is pending.

    kind "always_deepest" sleeps in the deepest c-state, "latency_aware"
    picks the deepest state whose threshold is at most the last observed
    interarrival gap, "poll" spins and never sleeps.
    """

    kind: str = "always_deepest"
    thresholds_us: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("always_deepest", "latency_aware", "poll"):
            raise SimValidationError(f"unknown idle policy {self.kind!r}")

    def resolved_thresholds(self, cstates: CStateModel) -> tuple[float, ...]:
        if self.thresholds_us is not None:
            if len(self.thresholds_us) != len(cstates.states):
                raise SimValidationError("idle thresholds must match the c-state list")
            return self.thresholds_us
        # default: require twice the exit latency of predicted idle
        return tuple(2.0 * s.exit_latency_us for s in cstates.states)


@dataclass(frozen=True)
class DetectionMode:
    """interrupt | hybrid (bounded poll after each interrupt) | poll."""

    kind: str = "interrupt"
    poll_budget: int = 256

    def __post_init__(self):
        if self.kind not in ("interrupt", "hybrid", "poll"):
            raise SimValidationError(f"unknown detection mode {self.kind!r}")
        if self.kind == "hybrid" and self.poll_budget < 1:
            raise SimValidationError("hybrid poll budget must be >= 1")


@dataclass(frozen=True)
class OsProfile:
    """Instruction costs of the OS paths around one request.

    kernel_user_copy_per_byte covers the crossing between kernel and user
    buffers (0 for a run-to-completion library-OS path);
    async_work_rate is unrelated background work interleaved per request;
    poll_check_instructions is the cost of one poll-loop iteration.
    """

    os_req_instructions: float = 2000.0
    os_reply_instructions: float = 1500.0
    unwind_instructions: float = 800.0
    interrupt_overhead_instructions: float = 1200.0
    async_work_rate: float = 0.0
    kernel_user_copy_per_byte: float = 0.0
    poll_check_instructions: float = 200.0

    def __post_init__(self):
        for name in ("os_req_instructions", "os_reply_instructions",
                     "unwind_instructions", "interrupt_overhead_instructions",
                     "async_work_rate", "kernel_user_copy_per_byte",
                     "poll_check_instructions"):
            if getattr(self, name) < 0:
                raise SimValidationError(f"{name} must be >= 0")


# Path-length presets; ratios follow the structural story (a general-purpose
# kernel pays interrupt dispatch, kernel/user copies, and background work
# that a single-application run-to-completion stack avoids), the absolute
# counts are assumptions.
OS_PRESETS = {
    "library_os": OsProfile(),
    "linux": OsProfile(os_req_instructions=9000.0, os_reply_instructions=7000.0,
                       unwind_instructions=2500.0,
                       interrupt_overhead_instructions=4500.0,
                       async_work_rate=3000.0, kernel_user_copy_per_byte=0.5,
                       poll_check_instructions=400.0),
}


@dataclass(frozen=True)
class NicModel:
    wire_bandwidth: float = 1250.0  # bytes per microsecond (10 GbE line rate)
    mtu: int = 1500
    itr: ItrSetting = ItrSetting(0)
    device_poll_batch: int = 64

    def __post_init__(self):
        if not (self.wire_bandwidth > 0):
            raise SimValidationError("wire bandwidth must be > 0")
        if self.mtu < 1:
            raise SimValidationError("mtu must be >= 1")
        if self.device_poll_batch < 1:
            raise SimValidationError("device poll batch must be >= 1")


@dataclass(frozen=True)
class WorkloadSpec:
    """Open loop (external arrival rate) or closed loop (lock-step client)."""

    kind: str = "open"
    lam: float = 1000.0                 # requests/s, open loop
    arrival_process: str = "deterministic"  # or "poisson"
    iterations: int = 1000              # closed loop
    client_think_us: float = 0.0        # closed loop
    request_size: int = 64
    reply_size: int = 64
    app_instructions: float = 10000.0

    def __post_init__(self):
        if self.kind not in ("open", "closed"):
            raise SimValidationError(f"unknown workload kind {self.kind!r}")
        if self.kind == "open" and not (self.lam > 0):
            raise SimValidationError("open-loop arrival rate must be > 0")
        if self.arrival_process not in ("deterministic", "poisson"):
            raise SimValidationError(f"unknown arrival process {self.arrival_process!r}")
        if self.kind == "closed" and self.iterations < 1:
            raise SimValidationError("closed-loop iterations must be >= 1")
        if self.client_think_us < 0:
            raise SimValidationError("client think time must be >= 0")
        if self.request_size < 1 or self.reply_size < 1:
            raise SimValidationError("request and reply sizes must be >= 1 byte")
        if self.app_instructions < 0:
            raise SimValidationError("app instructions must be >= 0")


@dataclass(frozen=True)
class StopCondition:
    """Stop after N requests or after the last arrival before duration_us."""

    requests: int | None = None
    duration_us: float | None = None

    def __post_init__(self):
        if self.requests is None and self.duration_us is None:
            raise SimValidationError("stop condition needs requests or duration_us")
        if self.requests is not None and self.requests < 1:
            raise SimValidationError("stop requests must be >= 1")
        if self.duration_us is not None and not (self.duration_us > 0):
            raise SimValidationError("stop duration must be > 0")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    dvfs: float = 1.0
    exponents: ScalingExponents = ScalingExponents()
    power: PowerModel = PowerModel()
    base_ips: float = 1e9
    detection: DetectionMode = DetectionMode()
    idle: IdlePolicy = IdlePolicy()
    cstates: CStateModel = field(default_factory=default_cstates)
    nic: NicModel = NicModel()
    os: OsProfile = OsProfile()
    stop: StopCondition = StopCondition(requests=1000)

    def __post_init__(self):
        if not (0.0 < self.dvfs <= 1.0):
            raise SimValidationError(f"dvfs must be in (0, 1], got {self.dvfs}")
        if not (self.base_ips > 0):
            raise SimValidationError("base_ips must be > 0")
        if self.detection.kind == "poll" and self.idle.kind != "poll":
            raise SimValidationError("poll detection requires the poll idle policy")
        if (self.detection.kind == "poll" or self.idle.kind == "poll") \
                and self.os.poll_check_instructions < 1:
            raise SimValidationError("poll configurations need poll_check_instructions >= 1")
        self.idle.resolved_thresholds(self.cstates)


# --- small pure operations -------------------------------------------------

_NO_PRIOR_IRQ = None


def itr_gate(event_time_us: float, last_irq_time_us: float | None, itr: ItrSetting) -> float:
    """When the NIC asserts for an event under the throttle window."""
    if event_time_us < 0:
        raise ValueError("event time must be >= 0")
    if itr.ticks == 0 or last_irq_time_us is None:
        return event_time_us
    if last_irq_time_us > event_time_us:
        raise ValueError("prior interrupt cannot be after the event")
    return max(event_time_us, last_irq_time_us + itr.delay_us)


def instruction_time(instructions: float, base_ips: float, delta: float, alpha: float) -> float:
    """Microseconds to execute instructions at a DVFS setting."""
    if not (base_ips > 0):
        raise ValueError("base_ips must be > 0")
    if not (delta > 0):
        raise ValueError(f"dvfs setting must be > 0, got {delta}")
    return instructions / (base_ips * delta ** (1.0 + alpha)) * 1e6


def packetize(nbytes: int, mtu: int) -> int:
    """Packets needed for a payload under the MTU."""
    if nbytes < 1:
        raise ValueError("payload must be >= 1 byte")
    return -(-nbytes // mtu)


def wire_time(nbytes: int, bandwidth: float) -> float:
    """Microseconds a payload occupies the wire."""
    if nbytes < 1:
        raise ValueError("payload must be >= 1 byte")
    return nbytes / bandwidth


def tail_latency(latencies, percentile: float = 99.0) -> float:
    """Nearest-rank percentile: rank = ceil(p/100 * n) of the sorted list."""
    arr = np.sort(np.asarray(latencies, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("latency list is empty")
    if not (0.0 < percentile <= 100.0):
        raise ValueError(f"percentile must be in (0, 100], got {percentile}")
    rank = math.ceil(percentile / 100.0 * arr.size)
    return float(arr[rank - 1])


# --- results ----------------------------------------------------------------

@dataclass
class SimResult:
    latencies_us: np.ndarray
    detect_us: np.ndarray
    via_irq: np.ndarray
    arrivals_us: np.ndarray
    total_energy_j: float
    interrupt_count: int
    skipped_consumptions: int
    busy_us: float
    detect_res_us: float
    poll_spin_us: float
    quiescent_us: float
    sleep_residency_us: np.ndarray
    sleep_entries: np.ndarray
    instructions: float
    completion_us: float
    wall_us: float
    trace: TraceStream
    workload_kind: str
    config_digest: str

    @property
    def active_us(self) -> float:
        """Time the core executed anything (busy + detection + spin)."""
        return self.busy_us + self.detect_res_us + self.poll_spin_us

    @property
    def residency_sum_us(self) -> float:
        return (self.busy_us + self.detect_res_us + self.poll_spin_us
                + self.quiescent_us + float(self.sleep_residency_us.sum()))

    def mean_latency_us(self) -> float:
        return float(self.latencies_us.mean())

    def p99_latency_us(self) -> float:
        return tail_latency(self.latencies_us, 99.0)


def energy_time_product(result: SimResult) -> float:
    """Joule-seconds over the run; the closed-loop efficiency figure."""
    if result.workload_kind != "closed":
        raise ValueError("energy-time product is defined for closed-loop runs")
    return result.total_energy_j * result.wall_us * 1e-6


# --- simulate ----------------------------------------------------------------

_DETECT_CODES = {"interrupt": kernel.DETECT_INTERRUPT, "hybrid": kernel.DETECT_HYBRID,
                 "poll": kernel.DETECT_POLL}
_IDLE_CODES = {"always_deepest": kernel.IDLE_DEEPEST,
               "latency_aware": kernel.IDLE_LATENCY_AWARE, "poll": kernel.IDLE_SPIN}

OVERLOAD_BACKLOG_LIMIT = 10  # requests; ~10x the per-interval mean arrivals


def _overload_limit(config: SimConfig, workload: WorkloadSpec) -> int:
    """Backlog threshold for the open-loop overload error.

    Ten times the mean arrivals per interval, where the interval grows
    with the throttle window: holding interrupts for 2us x ticks makes
    queues of lambda x window requests normal batching, not divergence.
    A diverging backlog still crosses any finite limit.
    """
    per_window = workload.lam * config.nic.itr.delay_us * 1e-6
    return OVERLOAD_BACKLOG_LIMIT * (1 + int(per_window))


def open_arrivals(workload: WorkloadSpec, config: SimConfig) -> np.ndarray:
    """First-byte arrival times (us) for an open-loop run.

    Deterministic arrivals sit at k/lambda; Poisson gaps come from
    inverse-CDF exponential sampling over a PCG64 stream seeded by the
    config.
    """
    gap = 1e6 / workload.lam
    if workload.arrival_process == "deterministic":
        if config.stop.requests is not None:
            n = config.stop.requests
            arr = gap * np.arange(1, n + 1, dtype=np.float64)
        else:
            n = max(1, int(config.stop.duration_us // gap))
            arr = gap * np.arange(1, n + 1, dtype=np.float64)
        return arr
    rng = np.random.Generator(np.random.PCG64(config.seed))
    if config.stop.requests is not None:
        u = rng.random(config.stop.requests)
        gaps = -np.log1p(-u) * gap
        return np.cumsum(gaps)
    # duration stop: draw in chunks until past the horizon
    out = []
    t = 0.0
    while t <= config.stop.duration_us:
        u = rng.random(1024)
        gaps = -np.log1p(-u) * gap
        chunk = t + np.cumsum(gaps)
        out.append(chunk)
        t = chunk[-1]
    arr = np.concatenate(out)
    arr = arr[arr <= config.stop.duration_us]
    if arr.size == 0:
        arr = np.array([gap])
    return arr


def config_digest(config: SimConfig, workload: WorkloadSpec) -> str:
    """Stable content digest of a (config, workload) pair."""
    from .config import dump_sim_config, dump_workload  # local import: config.py imports engine
    blob = json.dumps({"sim": dump_sim_config(config), "workload": dump_workload(workload)},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def service_instructions(config: SimConfig, workload: WorkloadSpec) -> float:
    """Instructions on the request-servicing path (detection excluded)."""
    copy = config.os.kernel_user_copy_per_byte * (workload.request_size + workload.reply_size)
    return (config.os.os_req_instructions + copy + workload.app_instructions
            + config.os.async_work_rate + config.os.os_reply_instructions)


def simulate(config: SimConfig, workload: WorkloadSpec,
             use_python_kernel: bool = False) -> SimResult:
    """Run the timeline and return per-request metrics, residencies, trace."""
    open_loop = workload.kind == "open"
    if open_loop:
        arrivals = open_arrivals(workload, config)
        n_req = arrivals.size
    else:
        if config.stop.duration_us is not None and config.stop.requests is None:
            raise SimValidationError(
                "closed-loop runs stop by iteration count, not duration")
        n_req = workload.iterations
        if config.stop.requests is not None:
            n_req = min(n_req, config.stop.requests)
        arrivals = np.zeros(0, np.float64)

    delta = config.dvfs
    alpha = config.exponents.alpha
    beta = config.exponents.beta
    tpi = 1.0 / (config.base_ips * delta ** (1.0 + alpha)) * 1e6

    p_work = work_power(config.power, delta, beta)
    p_detect = p_work if config.power.detect_tracks_work else config.power.p_detect

    n_pkt = packetize(workload.request_size, config.nic.mtu)
    pkt_off = np.empty(n_pkt, np.float64)
    pkt_bytes = np.empty(n_pkt, np.float64)
    for j in range(n_pkt):
        cum = min((j + 1) * config.nic.mtu, workload.request_size)
        pkt_off[j] = cum / config.nic.wire_bandwidth
        pkt_bytes[j] = min(config.nic.mtu, workload.request_size - j * config.nic.mtu)

    states = config.cstates.states
    exit_us = np.array([s.exit_latency_us for s in states], np.float64)
    power_w = np.array([s.idle_power_w for s in states], np.float64)
    thresholds = np.array(config.idle.resolved_thresholds(config.cstates), np.float64)

    detect_code = _DETECT_CODES[config.detection.kind]
    idle_code = _IDLE_CODES[config.idle.kind]
    budget_cap = (config.detection.poll_budget if config.detection.kind == "hybrid"
                  else config.nic.device_poll_batch)

    if use_python_kernel:
        run, binner = kernel.run_timeline_py, kernel.bin_segments_py
    else:
        run, binner = kernel.run_timeline, kernel.bin_segments

    (status, n_done, latencies, detect_us, via_irq, arrivals_out, irq_ts,
     seg_t0, seg_t1, seg_w, seg_i, seg_k, rx_t, rx_b, rx_d, tx_t, tx_b, tx_d,
     skipped, completion, t_end) = run(
        open_loop, arrivals, n_req, float(workload.client_think_us),
        pkt_off, pkt_bytes,
        wire_time(workload.reply_size, config.nic.wire_bandwidth),
        packetize(workload.reply_size, config.nic.mtu), float(workload.reply_size),
        tpi, service_instructions(config, workload),
        float(config.os.unwind_instructions),
        float(config.os.interrupt_overhead_instructions),
        float(config.os.poll_check_instructions),
        p_work, p_detect, config.power.p_quiescent,
        detect_code, budget_cap, idle_code,
        len(states), exit_us, power_w, thresholds,
        config.nic.itr.delay_us,
        _overload_limit(config, workload) if open_loop else 0)

    if status == kernel.STATUS_OVERLOAD:
        raise OverloadError(completed=n_done,
                            pending=_overload_limit(config, workload) + 1)

    (ms_joules, ms_instr, ms_exec_us, irq_joules, irq_rxb, irq_rxd, irq_txb,
     irq_txd, irq_slp_n, irq_slp_us, busy_us, detect_res, spin_us, quiesc_us,
     sleep_us, sleep_n, total_energy, total_instr) = binner(
        seg_t0, seg_t1, seg_w, seg_i, seg_k, irq_ts,
        rx_t, rx_b, rx_d, tx_t, tx_b, tx_d, len(states), t_end)

    digest = config_digest(config, workload)
    header = TraceHeader(config_digest=digest, seed=config.seed,
                         itr_ticks=config.nic.itr.ticks,
                         cstates=config.cstates.names)
    cycles_per_us = config.base_ips * 1e-6 * delta
    records = []
    irq_i = 0
    n_ms = ms_joules.shape[0]
    for b in range(n_ms):
        boundary = (b + 1) * 1000.0
        while irq_i < irq_ts.size and irq_ts[irq_i] <= boundary:
            if irq_ts[irq_i] < boundary:
                records.append(_irq_record(irq_i, irq_ts, irq_rxb, irq_rxd, irq_txb,
                                           irq_txd, irq_slp_n, irq_slp_us, irq_joules))
                irq_i += 1
            else:
                break
        records.append(PeriodicSample(
            timestamp_us=boundary, instructions=float(ms_instr[b]),
            cycles=float(ms_exec_us[b]) * cycles_per_us, llc_misses=0,
            joules=float(ms_joules[b])))
        while irq_i < irq_ts.size and irq_ts[irq_i] == boundary:
            records.append(_irq_record(irq_i, irq_ts, irq_rxb, irq_rxd, irq_txb,
                                       irq_txd, irq_slp_n, irq_slp_us, irq_joules))
            irq_i += 1
    while irq_i < irq_ts.size:  # pragma: no cover - irqs never outrun t_end
        records.append(_irq_record(irq_i, irq_ts, irq_rxb, irq_rxd, irq_txb,
                                   irq_txd, irq_slp_n, irq_slp_us, irq_joules))
        irq_i += 1

    trace = TraceStream(header=header, records=records)
    return SimResult(
        latencies_us=latencies[:n_done], detect_us=detect_us[:n_done],
        via_irq=via_irq[:n_done].astype(bool), arrivals_us=arrivals_out[:n_done],
        total_energy_j=float(total_energy), interrupt_count=int(irq_ts.size),
        skipped_consumptions=int(skipped), busy_us=float(busy_us),
        detect_res_us=float(detect_res), poll_spin_us=float(spin_us),
        quiescent_us=float(quiesc_us), sleep_residency_us=sleep_us,
        sleep_entries=sleep_n, instructions=float(total_instr),
        completion_us=float(completion), wall_us=float(t_end), trace=trace,
        workload_kind=workload.kind, config_digest=digest)


def _irq_record(i, irq_ts, irq_rxb, irq_rxd, irq_txb, irq_txd,
                irq_slp_n, irq_slp_us, irq_joules) -> InterruptRecord:
    return InterruptRecord(
        timestamp_us=float(irq_ts[i]), rx_bytes=int(irq_rxb[i]),
        tx_bytes=int(irq_txb[i]), rx_descriptors=int(irq_rxd[i]),
        tx_descriptors=int(irq_txd[i]),
        sleep_entries=tuple(int(x) for x in irq_slp_n[i]),
        sleep_residency_us=tuple(float(x) for x in irq_slp_us[i]),
        joules_since_last=float(irq_joules[i]))


def with_dvfs_and_itr(config: SimConfig, delta: float, ticks: int) -> SimConfig:
    """Copy a config with new DVFS and interrupt-throttle settings."""
    return replace(config, dvfs=delta, nic=replace(config.nic, itr=ItrSetting(ticks)))
