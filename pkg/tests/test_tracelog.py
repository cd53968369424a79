import io

import numpy as np
import pytest

from eplab.tracelog import (
    InterruptRecord,
    PeriodicSample,
    TraceError,
    TraceHeader,
    TraceParseError,
    TraceStream,
    TraceWindow,
    aggregate,
    audit_itr_spacing,
    dumps,
    open_stream,
    parse_stream,
    totals,
    write_stream,
)


def make_header(**kw):
    defaults = dict(config_digest="deadbeef", seed=7, itr_ticks=2,
                    cstates=("C1", "C7"))
    defaults.update(kw)
    return TraceHeader(**defaults)


def random_stream(rng, n_irq=20, n_samples=10):
    """Random but valid trace: strictly increasing timestamps per kind."""
    header = make_header(itr_ticks=0)
    irq_ts = np.cumsum(rng.uniform(0.5, 200.0, n_irq))
    smp_ts = 1000.0 * np.arange(1, n_samples + 1)
    records = []
    for t in irq_ts:
        records.append(InterruptRecord(
            timestamp_us=float(t),
            rx_bytes=int(rng.integers(0, 10000)),
            tx_bytes=int(rng.integers(0, 10000)),
            rx_descriptors=int(rng.integers(0, 64)),
            tx_descriptors=int(rng.integers(0, 64)),
            sleep_entries=(int(rng.integers(0, 5)), int(rng.integers(0, 5))),
            sleep_residency_us=(float(rng.uniform(0, 100)), float(rng.uniform(0, 100))),
            joules_since_last=float(rng.uniform(0, 1e-3))))
    for t in smp_ts:
        records.append(PeriodicSample(
            timestamp_us=float(t), instructions=float(rng.uniform(0, 1e6)),
            cycles=float(rng.uniform(0, 1e6)), llc_misses=0,
            joules=float(rng.uniform(0, 1e-3))))
    records.sort(key=lambda r: (r.timestamp_us, isinstance(r, InterruptRecord)))
    return TraceStream(header=header, records=records)


def test_empty_stream_roundtrip():
    stream = TraceStream(header=make_header())
    text = dumps(stream)
    back = parse_stream(text)
    assert back.header == stream.header
    assert back.records == []


def test_two_interrupts_roundtrip_exact():
    header = make_header()
    recs = [
        InterruptRecord(timestamp_us=10.0, rx_bytes=64, tx_bytes=0,
                        rx_descriptors=1, tx_descriptors=0,
                        sleep_entries=(1, 0), sleep_residency_us=(3.25, 0.0),
                        joules_since_last=1.5e-5),
        InterruptRecord(timestamp_us=20.0, rx_bytes=128, tx_bytes=64,
                        rx_descriptors=2, tx_descriptors=1,
                        sleep_entries=(0, 1), sleep_residency_us=(0.0, 7.125),
                        joules_since_last=2.5e-5),
    ]
    stream = TraceStream(header=header, records=recs)
    back = parse_stream(dumps(stream))
    assert back.records == recs
    assert back.header == header


def test_roundtrip_property_randomized():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        stream = random_stream(rng, n_irq=int(rng.integers(0, 30)),
                               n_samples=int(rng.integers(0, 10)))
        text = dumps(stream)
        back = parse_stream(text)
        assert back.header == stream.header
        assert back.records == stream.records
        assert dumps(back) == text  # serialize-parse-serialize is a fixed point


def test_writer_rejects_timestamp_regression():
    buf = io.StringIO()
    w = open_stream(buf, make_header())
    w.emit(InterruptRecord(timestamp_us=10.0))
    with pytest.raises(TraceError):
        w.emit(InterruptRecord(timestamp_us=10.0))
    with pytest.raises(TraceError):
        w.emit(InterruptRecord(timestamp_us=5.0))
    w.emit(InterruptRecord(timestamp_us=11.0))
    # samples interleave but may not go backwards in time
    with pytest.raises(TraceError):
        w.emit(PeriodicSample(timestamp_us=10.5))
    w.emit(PeriodicSample(timestamp_us=1000.0))


def test_writer_requires_header_first():
    buf = io.StringIO()
    from eplab.tracelog import TraceWriter
    w = TraceWriter(buf)
    with pytest.raises(TraceError):
        w.emit(InterruptRecord(timestamp_us=1.0))
    w.write_header(make_header())
    with pytest.raises(TraceError):
        w.write_header(make_header())


def test_parse_positioned_error_and_partial():
    stream = random_stream(np.random.default_rng(1), n_irq=5, n_samples=2)
    text = dumps(stream)
    lines = text.splitlines(keepends=True)
    # corrupt the 4th line (header + 3 records are intact)
    corrupted = "".join(lines[:4]) + lines[4][: len(lines[4]) // 2] + "\n" + "".join(lines[5:])
    with pytest.raises(TraceParseError) as exc_info:
        parse_stream(corrupted)
    err = exc_info.value
    assert err.offset == sum(len(l.encode()) for l in lines[:4])
    assert err.partial is not None
    assert err.partial.records == stream.records[:3]


def test_parse_rejects_schema_mismatch():
    text = dumps(TraceStream(header=make_header()))
    bad = text.replace('"schema_version":1', '"schema_version":99')
    with pytest.raises(TraceParseError) as e:
        parse_stream(bad)
    assert "schema_version" in e.value.reason


def test_parse_rejects_monotonicity_violation():
    header_line = dumps(TraceStream(header=make_header()))
    r1 = InterruptRecord(timestamp_us=10.0)
    r2 = InterruptRecord(timestamp_us=5.0)
    import json
    text = header_line + json.dumps(r1.to_json_obj(), separators=(",", ":")) + "\n" \
        + json.dumps(r2.to_json_obj(), separators=(",", ":")) + "\n"
    with pytest.raises(TraceParseError) as e:
        parse_stream(text)
    assert "not increasing" in e.value.reason
    assert len(e.value.partial.records) == 1


def test_parse_rejects_truncated_tail():
    text = dumps(random_stream(np.random.default_rng(3), n_irq=2, n_samples=0))
    with pytest.raises(TraceParseError) as e:
        parse_stream(text[:-3])  # drop the trailing newline and some JSON
    assert "truncated" in e.value.reason or "bad JSON" in e.value.reason


def test_mixed_kinds_interleave_by_timestamp():
    stream = random_stream(np.random.default_rng(5), n_irq=30, n_samples=8)
    back = parse_stream(dumps(stream))
    ts = [r.timestamp_us for r in back.records]
    assert ts == sorted(ts)
    kinds = {type(r) for r in back.records}
    assert kinds == {InterruptRecord, PeriodicSample}


def test_aggregate_single_window_equals_totals():
    stream = random_stream(np.random.default_rng(8))
    whole = aggregate(stream, stream.span_us + 1.0)
    assert len(whole) == 1
    t = totals(stream)
    w = whole[0]
    assert w.interrupts == t.interrupts
    assert w.rx_bytes == t.rx_bytes
    assert w.joules == pytest.approx(t.joules, rel=1e-12)


def test_aggregate_uniform_trace_equal_halves():
    header = make_header(itr_ticks=0)
    records = []
    for i in range(100):
        records.append(InterruptRecord(timestamp_us=0.5 + i * 1.0, rx_bytes=100,
                                       rx_descriptors=1, sleep_entries=(0, 0),
                                       sleep_residency_us=(0.0, 0.0),
                                       joules_since_last=1e-6))
    stream = TraceStream(header=header, records=records)
    halves = aggregate(stream, 50.0)
    assert len(halves) == 2
    assert halves[0].rx_bytes == halves[1].rx_bytes == 5000
    assert halves[0].interrupts == halves[1].interrupts == 50
    assert halves[0].joules == pytest.approx(halves[1].joules, rel=1e-12)


def test_aggregate_partition_homomorphism():
    stream = random_stream(np.random.default_rng(13), n_irq=200, n_samples=20)
    base = totals(stream)
    for window in (7.0, 97.0, 1000.0, 333.33):
        wins = aggregate(stream, window)
        assert sum(w.interrupts for w in wins) == base.interrupts
        assert sum(w.rx_bytes for w in wins) == base.rx_bytes
        assert sum(w.tx_bytes for w in wins) == base.tx_bytes
        assert sum(w.rx_descriptors for w in wins) == base.rx_descriptors
        assert sum(w.sleep_entries for w in wins) == base.sleep_entries
        assert sum(w.joules for w in wins) == pytest.approx(base.joules, rel=1e-12)
        assert sum(w.instructions for w in wins) == pytest.approx(
            base.instructions, rel=1e-12)
        # windows tile the span contiguously
        assert wins[0].t0_us == 0.0
        assert all(a.t1_us == b.t0_us for a, b in zip(wins, wins[1:]))
        assert wins[-1].t1_us >= stream.span_us


def test_aggregate_rejects_bad_window():
    stream = random_stream(np.random.default_rng(0))
    with pytest.raises(ValueError):
        aggregate(stream, 0.0)


def test_audit_itr_spacing():
    ok = TraceStream(header=make_header(itr_ticks=2), records=[
        InterruptRecord(timestamp_us=0.0), InterruptRecord(timestamp_us=4.0),
        InterruptRecord(timestamp_us=9.0)])
    audit_itr_spacing(ok)
    bad = TraceStream(header=make_header(itr_ticks=2), records=[
        InterruptRecord(timestamp_us=0.0), InterruptRecord(timestamp_us=3.0)])
    with pytest.raises(TraceError):
        audit_itr_spacing(bad)


def test_record_validation():
    with pytest.raises(TraceError):
        InterruptRecord(timestamp_us=-1.0)
    with pytest.raises(TraceError):
        InterruptRecord(timestamp_us=0.0, rx_bytes=-1)
    with pytest.raises(TraceError):
        InterruptRecord(timestamp_us=0.0, sleep_entries=(1,), sleep_residency_us=())
    with pytest.raises(TraceError):
        PeriodicSample(timestamp_us=0.0, joules=-1e-9)


def test_file_roundtrip_byte_identical(tmp_path):
    stream = random_stream(np.random.default_rng(21))
    p1 = tmp_path / "a.trace"
    p2 = tmp_path / "b.trace"
    with open(p1, "w") as f:
        write_stream(stream, f)
    with open(p2, "w") as f:
        write_stream(stream, f)
    assert p1.read_bytes() == p2.read_bytes()
    from eplab.tracelog import parse_file
    assert parse_file(p1).records == stream.records
