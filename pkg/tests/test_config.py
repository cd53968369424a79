import json

import pytest

from eplab.config import (
    ConfigError,
    dump_sim_config,
    dump_workload,
    load_file,
    parse_document,
    parse_scenario,
    parse_sim_config,
    parse_workload,
)
from eplab.engine import OS_PRESETS


FULL_DOC = {
    "schema_version": 1,
    "scenario": {
        "lambda_per_s": 2000.0, "f_detect": 0.1, "f_work_max": 0.5,
        "alpha": 0.0, "beta": 0.0,
        "power": {"p_static_w": 10.0, "p_dyn_w": 20.0},
    },
    "sim": {
        "seed": 3, "delta": 0.8, "alpha": 0.5, "beta": 0.0,
        "power": {"p_static_w": 10.0, "p_dyn_w": 20.0, "p_quiescent_w": 0.3},
        "base_ips": 1e9,
        "detection": {"mode": "hybrid", "poll_budget": 128},
        "idle": {"policy": "latency_aware", "thresholds_us": [4.0, 80.0, 240.0]},
        "cstates": [
            {"name": "C1", "exit_latency_us": 2.0, "idle_power_w": 1.5},
            {"name": "C3", "exit_latency_us": 40.0, "idle_power_w": 0.6},
            {"name": "C7", "exit_latency_us": 120.0, "idle_power_w": 0.05},
        ],
        "nic": {"bandwidth_bytes_per_us": 1250.0, "mtu_bytes": 1500,
                "itr_ticks": 4, "device_poll_batch": 64},
        "os": {"preset": "linux"},
        "stop": {"requests": 500},
    },
    "workload": {"kind": "open", "lambda_per_s": 20000.0, "arrival": "poisson",
                 "request_bytes": 64, "reply_bytes": 128,
                 "app_instructions": 4000.0},
    "sweep": {"delta_values": [0.5, 1.0], "itr_ticks": [0, 5],
              "repetitions": 2, "seed_base": 7},
}


def test_full_document_parses():
    doc = parse_document(FULL_DOC)
    assert doc.sim.seed == 3
    assert doc.sim.detection.kind == "hybrid"
    assert doc.sim.idle.thresholds_us == (4.0, 80.0, 240.0)
    assert doc.sim.os.kernel_user_copy_per_byte == \
        OS_PRESETS["linux"].kernel_user_copy_per_byte
    assert doc.workload.arrival_process == "poisson"
    assert doc.sweep.repetitions == 2
    assert doc.scenario.f_work_max == 0.5


def test_unknown_keys_rejected_with_path():
    bad = json.loads(json.dumps(FULL_DOC))
    bad["sim"]["nic"]["mtu"] = 9000  # correct key is mtu_bytes
    with pytest.raises(ConfigError) as e:
        parse_document(bad)
    assert "sim.nic" in str(e.value)
    assert "mtu" in str(e.value)

    with pytest.raises(ConfigError):
        parse_document({"unexpected_top": 1})


def test_validation_errors_carry_paths():
    with pytest.raises(ConfigError) as e:
        parse_sim_config({"delta": 0.0})
    assert e.value.path == "sim"

    with pytest.raises(ConfigError) as e:
        parse_workload({"kind": "open", "lambda_per_s": -5.0})
    assert "workload" in str(e.value)

    with pytest.raises(ConfigError) as e:
        parse_scenario({"f_detect": 2.0})
    assert "scenario" in str(e.value)


def test_wrong_types_rejected():
    with pytest.raises(ConfigError):
        parse_sim_config({"seed": 1.5})
    with pytest.raises(ConfigError):
        parse_sim_config({"delta": "fast"})
    with pytest.raises(ConfigError):
        parse_workload({"kind": "sideways"})
    with pytest.raises(ConfigError):
        parse_document({"schema_version": 99})


def test_os_preset_with_field_override():
    cfg = parse_sim_config({"os": {"preset": "linux", "async_work_rate": 0.0}})
    assert cfg.os.async_work_rate == 0.0
    assert cfg.os.os_req_instructions == OS_PRESETS["linux"].os_req_instructions


def test_dump_parse_roundtrip():
    doc = parse_document(FULL_DOC)
    dumped = dump_sim_config(doc.sim)
    again = parse_sim_config(dumped)
    assert again == doc.sim
    assert parse_workload(dump_workload(doc.workload)) == doc.workload


def test_load_file(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(FULL_DOC))
    doc = load_file(p)
    assert doc.sim.dvfs == 0.8
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError):
        load_file(bad)
