"""Per-interrupt and per-millisecond trace records.

A trace is a line-delimited text stream: one JSON object per line, first a
header, then records of two kinds in timestamp order:

    {"kind": "header", "schema_version": 1, "config_digest": "...",
     "seed": 0, "itr_ticks": 0, "cstates": ["C1", "C3", "C7"]}
    {"kind": "interrupt", "timestamp_us": ..., "rx_bytes": ...,
     "tx_bytes": ..., "rx_descriptors": ..., "tx_descriptors": ...,
     "sleep_entries": [...], "sleep_residency_us": [...],
     "joules_since_last": ...}
    {"kind": "sample", "timestamp_us": ..., "instructions": ...,
     "cycles": ..., "llc_misses": 0, "joules": ...}

Interrupt records carry activity since the previous interrupt record;
samples are emitted on an exact 1 ms cadence and their joules fields sum
to the run's total energy.  Serialization uses repr-exact floats, so
emit-then-parse is the identity and identical runs produce byte-identical
files.  llc_misses is always zero in simulated traces (placeholder for
hardware counters) and cycles are derived from busy time.

Timestamps must strictly increase within each record kind and never go
backwards across kinds; the writer and parser both enforce this.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


class TraceError(ValueError):
    pass


class TraceParseError(TraceError):
    """Parse failure at a byte offset; records before it are preserved."""

    def __init__(self, offset: int, reason: str, partial: "TraceStream | None" = None):
        super().__init__(f"trace parse error at byte {offset}: {reason}")
        self.offset = offset
        self.reason = reason
        self.partial = partial


@dataclass(frozen=True)
class TraceHeader:
    config_digest: str = ""
    seed: int = 0
    itr_ticks: int = 0
    cstates: tuple[str, ...] = ()
    schema_version: int = SCHEMA_VERSION

    def to_json_obj(self) -> dict:
        return {
            "kind": "header",
            "schema_version": self.schema_version,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "itr_ticks": self.itr_ticks,
            "cstates": list(self.cstates),
        }


@dataclass(frozen=True)
class InterruptRecord:
    timestamp_us: float
    rx_bytes: int = 0
    tx_bytes: int = 0
    rx_descriptors: int = 0
    tx_descriptors: int = 0
    sleep_entries: tuple[int, ...] = ()
    sleep_residency_us: tuple[float, ...] = ()
    joules_since_last: float = 0.0

    def __post_init__(self):
        if self.timestamp_us < 0.0:
            raise TraceError(f"negative timestamp {self.timestamp_us}")
        for name in ("rx_bytes", "tx_bytes", "rx_descriptors", "tx_descriptors",
                     "joules_since_last"):
            if getattr(self, name) < 0:
                raise TraceError(f"negative {name}")
        if any(n < 0 for n in self.sleep_entries):
            raise TraceError("negative sleep entry count")
        if any(r < 0 for r in self.sleep_residency_us):
            raise TraceError("negative sleep residency")
        if len(self.sleep_entries) != len(self.sleep_residency_us):
            raise TraceError("sleep_entries and sleep_residency_us lengths differ")

    def to_json_obj(self) -> dict:
        return {
            "kind": "interrupt",
            "timestamp_us": self.timestamp_us,
            "rx_bytes": self.rx_bytes,
            "tx_bytes": self.tx_bytes,
            "rx_descriptors": self.rx_descriptors,
            "tx_descriptors": self.tx_descriptors,
            "sleep_entries": list(self.sleep_entries),
            "sleep_residency_us": list(self.sleep_residency_us),
            "joules_since_last": self.joules_since_last,
        }


@dataclass(frozen=True)
class PeriodicSample:
    timestamp_us: float
    instructions: float = 0.0
    cycles: float = 0.0
    llc_misses: int = 0
    joules: float = 0.0

    def __post_init__(self):
        if self.timestamp_us < 0.0:
            raise TraceError(f"negative timestamp {self.timestamp_us}")
        for name in ("instructions", "cycles", "llc_misses", "joules"):
            if getattr(self, name) < 0:
                raise TraceError(f"negative {name}")

    def to_json_obj(self) -> dict:
        return {
            "kind": "sample",
            "timestamp_us": self.timestamp_us,
            "instructions": self.instructions,
            "cycles": self.cycles,
            "llc_misses": self.llc_misses,
            "joules": self.joules,
        }


@dataclass
class TraceStream:
    header: TraceHeader
    records: list = field(default_factory=list)

    @property
    def interrupts(self) -> list[InterruptRecord]:
        return [r for r in self.records if isinstance(r, InterruptRecord)]

    @property
    def samples(self) -> list[PeriodicSample]:
        return [r for r in self.records if isinstance(r, PeriodicSample)]

    @property
    def span_us(self) -> float:
        return max((r.timestamp_us for r in self.records), default=0.0)

    def total_energy_j(self) -> float:
        """Energy integrated by the periodic sample stream."""
        return sum(r.joules for r in self.samples)


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


class TraceWriter:
    """Append-only writer; header first, then records in timestamp order."""

    def __init__(self, fileobj):
        self._f = fileobj
        self._header_written = False
        self._last_ts = {"interrupt": -math.inf, "sample": -math.inf}
        self._last_any = -math.inf

    def write_header(self, header: TraceHeader) -> None:
        if self._header_written:
            raise TraceError("header already written")
        self._f.write(_dump_line(header.to_json_obj()))
        self._header_written = True

    def emit(self, record) -> None:
        if not self._header_written:
            raise TraceError("header must be written before records")
        kind = "interrupt" if isinstance(record, InterruptRecord) else "sample"
        ts = record.timestamp_us
        if ts <= self._last_ts[kind]:
            raise TraceError(
                f"timestamp regression in {kind} stream: {ts} after {self._last_ts[kind]}")
        if ts < self._last_any:
            raise TraceError(
                f"timestamp regression across streams: {ts} after {self._last_any}")
        self._last_ts[kind] = ts
        self._last_any = ts
        self._f.write(_dump_line(record.to_json_obj()))

    def flush(self) -> None:
        self._f.flush()


def open_stream(fileobj, header: TraceHeader) -> TraceWriter:
    w = TraceWriter(fileobj)
    w.write_header(header)
    return w


def write_stream(stream: TraceStream, fileobj) -> None:
    w = open_stream(fileobj, stream.header)
    for rec in stream.records:
        w.emit(rec)
    w.flush()


def dumps(stream: TraceStream) -> str:
    buf = io.StringIO()
    write_stream(stream, buf)
    return buf.getvalue()


_HEADER_KEYS = {"kind", "schema_version", "config_digest", "seed", "itr_ticks", "cstates"}
_IRQ_KEYS = {"kind", "timestamp_us", "rx_bytes", "tx_bytes", "rx_descriptors",
             "tx_descriptors", "sleep_entries", "sleep_residency_us", "joules_since_last"}
_SAMPLE_KEYS = {"kind", "timestamp_us", "instructions", "cycles", "llc_misses", "joules"}


def parse_stream(source) -> TraceStream:
    """Parse a trace from a str, bytes, or text file object.

    Raises TraceParseError with the byte offset of the offending line; the
    error's .partial field holds everything parsed before the failure.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()

    offset = 0
    stream: TraceStream | None = None
    last_ts = {"interrupt": -math.inf, "sample": -math.inf}
    last_any = -math.inf

    def fail(reason):
        raise TraceParseError(offset, reason, partial=stream)

    for line in text.splitlines(keepends=True):
        stripped = line.strip()
        if stripped:
            if not line.endswith("\n"):
                fail("truncated record (no trailing newline)")
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as e:
                fail(f"bad JSON: {e.msg}")
            if not isinstance(obj, dict) or "kind" not in obj:
                fail("record is not an object with a kind tag")
            kind = obj["kind"]
            try:
                if stream is None:
                    if kind != "header":
                        fail("first record must be the header")
                    if set(obj) != _HEADER_KEYS:
                        fail(f"header keys mismatch: {sorted(obj)}")
                    if obj["schema_version"] != SCHEMA_VERSION:
                        fail(f"unsupported schema_version {obj['schema_version']}")
                    stream = TraceStream(TraceHeader(
                        config_digest=obj["config_digest"], seed=obj["seed"],
                        itr_ticks=obj["itr_ticks"], cstates=tuple(obj["cstates"]),
                        schema_version=obj["schema_version"]))
                elif kind == "header":
                    fail("duplicate header")
                elif kind == "interrupt":
                    if set(obj) != _IRQ_KEYS:
                        fail(f"interrupt record keys mismatch: {sorted(obj)}")
                    rec = InterruptRecord(
                        timestamp_us=obj["timestamp_us"], rx_bytes=obj["rx_bytes"],
                        tx_bytes=obj["tx_bytes"], rx_descriptors=obj["rx_descriptors"],
                        tx_descriptors=obj["tx_descriptors"],
                        sleep_entries=tuple(obj["sleep_entries"]),
                        sleep_residency_us=tuple(obj["sleep_residency_us"]),
                        joules_since_last=obj["joules_since_last"])
                    if rec.timestamp_us <= last_ts["interrupt"]:
                        fail(f"interrupt timestamp not increasing: {rec.timestamp_us}")
                    if rec.timestamp_us < last_any:
                        fail(f"timestamp regression across kinds: {rec.timestamp_us}")
                    last_ts["interrupt"] = rec.timestamp_us
                    last_any = rec.timestamp_us
                    stream.records.append(rec)
                elif kind == "sample":
                    if set(obj) != _SAMPLE_KEYS:
                        fail(f"sample record keys mismatch: {sorted(obj)}")
                    rec = PeriodicSample(
                        timestamp_us=obj["timestamp_us"], instructions=obj["instructions"],
                        cycles=obj["cycles"], llc_misses=obj["llc_misses"],
                        joules=obj["joules"])
                    if rec.timestamp_us <= last_ts["sample"]:
                        fail(f"sample timestamp not increasing: {rec.timestamp_us}")
                    if rec.timestamp_us < last_any:
                        fail(f"timestamp regression across kinds: {rec.timestamp_us}")
                    last_ts["sample"] = rec.timestamp_us
                    last_any = rec.timestamp_us
                    stream.records.append(rec)
                else:
                    fail(f"unknown record kind {kind!r}")
            except (KeyError, TypeError) as e:
                fail(f"malformed {kind} record: {e}")
            except TraceError as e:
                if isinstance(e, TraceParseError):
                    raise
                fail(str(e))
        offset += len(line.encode("utf-8"))
    if stream is None:
        raise TraceParseError(0, "empty stream (missing header)")
    return stream


def parse_file(path) -> TraceStream:
    with open(path, "r", encoding="utf-8") as f:
        return parse_stream(f)


@dataclass(frozen=True)
class TraceWindow:
    """Sums of record fields whose timestamps fall in [t0_us, t1_us)."""

    t0_us: float
    t1_us: float
    interrupts: int = 0
    rx_bytes: int = 0
    tx_bytes: int = 0
    rx_descriptors: int = 0
    tx_descriptors: int = 0
    sleep_entries: int = 0
    sleep_residency_us: float = 0.0
    joules: float = 0.0
    instructions: float = 0.0
    cycles: float = 0.0

    @property
    def duration_us(self) -> float:
        return self.t1_us - self.t0_us

    @property
    def rx_bytes_per_us(self) -> float:
        return self.rx_bytes / self.duration_us if self.duration_us > 0 else 0.0

    @property
    def watts(self) -> float:
        return self.joules / (self.duration_us * 1e-6) if self.duration_us > 0 else 0.0


def aggregate(stream: TraceStream, window_us: float) -> list[TraceWindow]:
    """Tile the trace span with fixed windows and sum record fields per window.

    Record timestamps pick their window by floor division, so every record
    lands in exactly one window and refining the window size never changes
    grand totals.  Energy and instruction sums come from the periodic
    sample stream; byte/descriptor/sleep sums from the interrupt stream.
    """
    if not (window_us > 0):
        raise ValueError(f"window must be > 0, got {window_us}")
    span = stream.span_us
    n_win = int(span // window_us) + 1 if stream.records else 0
    acc = [dict(interrupts=0, rx_bytes=0, tx_bytes=0, rx_descriptors=0,
                tx_descriptors=0, sleep_entries=0, sleep_residency_us=0.0,
                joules=0.0, instructions=0.0, cycles=0.0)
           for _ in range(n_win)]
    for rec in stream.records:
        i = int(rec.timestamp_us // window_us)
        a = acc[i]
        if isinstance(rec, InterruptRecord):
            a["interrupts"] += 1
            a["rx_bytes"] += rec.rx_bytes
            a["tx_bytes"] += rec.tx_bytes
            a["rx_descriptors"] += rec.rx_descriptors
            a["tx_descriptors"] += rec.tx_descriptors
            a["sleep_entries"] += sum(rec.sleep_entries)
            a["sleep_residency_us"] += sum(rec.sleep_residency_us)
        else:
            a["joules"] += rec.joules
            a["instructions"] += rec.instructions
            a["cycles"] += rec.cycles
    return [TraceWindow(t0_us=i * window_us, t1_us=(i + 1) * window_us, **a)
            for i, a in enumerate(acc)]


def totals(stream: TraceStream) -> TraceWindow:
    """Whole-trace sums, as a single window spanning everything."""
    wins = aggregate(stream, max(stream.span_us, 1.0) + 1.0) if stream.records else []
    if not wins:
        return TraceWindow(0.0, 0.0)
    w = wins[0]
    return TraceWindow(t0_us=0.0, t1_us=stream.span_us, interrupts=w.interrupts,
                       rx_bytes=w.rx_bytes, tx_bytes=w.tx_bytes,
                       rx_descriptors=w.rx_descriptors, tx_descriptors=w.tx_descriptors,
                       sleep_entries=w.sleep_entries,
                       sleep_residency_us=w.sleep_residency_us, joules=w.joules,
                       instructions=w.instructions, cycles=w.cycles)


def audit_itr_spacing(stream: TraceStream) -> None:
    """Check every interrupt pair honors the header's throttle window."""
    window = 2.0 * stream.header.itr_ticks
    irqs = stream.interrupts
    for a, b in zip(irqs, irqs[1:]):
        gap = b.timestamp_us - a.timestamp_us
        if gap + 1e-9 < window:
            raise TraceError(
                f"interrupts at {a.timestamp_us} and {b.timestamp_us} violate "
                f"the {window} us throttle window")
