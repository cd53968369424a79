import json

import pytest

from eplab.cli import main
from eplab.model import AnalyticScenario, PowerModel, curve_sweep, normalized_energy

CONFIG = {
    "schema_version": 1,
    "scenario": {"lambda_per_s": 1000.0, "f_detect": 0.1, "f_work_max": 0.5,
                 "alpha": 0.0, "beta": 0.0,
                 "power": {"p_static_w": 10.0, "p_dyn_w": 20.0}},
    "sim": {
        "seed": 1, "delta": 1.0,
        "power": {"p_static_w": 10.0, "p_dyn_w": 20.0, "p_quiescent_w": 0.2},
        "base_ips": 1e9,
        "cstates": [{"name": "C1", "exit_latency_us": 2.0, "idle_power_w": 1.0}],
        "nic": {"itr_ticks": 0},
        "os": {"preset": "library_os"},
        "stop": {"requests": 150},
    },
    "workload": {"kind": "open", "lambda_per_s": 20000.0, "arrival": "poisson",
                 "request_bytes": 64, "reply_bytes": 64,
                 "app_instructions": 3000.0},
    "sweep": {"delta_values": [0.7, 1.0], "itr_ticks": [0, 4],
              "repetitions": 2, "seed_base": 3},
}


@pytest.fixture
def config_path(tmp_path):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(CONFIG))
    return str(p)


def test_model_curve_reproduces_formula(config_path, tmp_path, capsys):
    out = tmp_path / "curve.csv"
    rc = main(["model-curve", "--config", config_path,
               "--deltas", "0.5,1.0", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "delta,norm_latency,norm_energy"
    rows = [l.split(",") for l in lines[1:]]
    assert float(rows[0][1]) == pytest.approx(1.1, rel=1e-12)
    assert float(rows[0][2]) == pytest.approx(16.5, rel=1e-12)
    assert float(rows[1][1]) == pytest.approx(0.6, rel=1e-12)
    assert float(rows[1][2]) == pytest.approx(18.0, rel=1e-12)
    # values equal the in-process operation bit for bit
    scenario = AnalyticScenario(f_detect=0.1, f_work_max=0.5,
                                power=PowerModel(p_static=10.0, p_dyn=20.0))
    pts = curve_sweep(scenario, [0.5, 1.0])
    assert float(rows[0][2]) == pts[0].norm_energy


def test_simulate_byte_identical_traces(config_path, tmp_path, capsys):
    t1 = tmp_path / "a.trace"
    t2 = tmp_path / "b.trace"
    assert main(["simulate", "--config", config_path, "--out-trace", str(t1),
                 "--summary", str(tmp_path / "s1.json")]) == 0
    assert main(["simulate", "--config", config_path, "--out-trace", str(t2),
                 "--summary", str(tmp_path / "s2.json")]) == 0
    assert t1.read_bytes() == t2.read_bytes()
    s1 = json.loads((tmp_path / "s1.json").read_text())
    assert s1["requests"] == 150
    assert s1["p99_latency_us"] > 0
    # a different seed changes the trace
    t3 = tmp_path / "c.trace"
    assert main(["simulate", "--config", config_path, "--seed", "99",
                 "--out-trace", str(t3), "--summary", str(tmp_path / "s3.json")]) == 0
    assert t1.read_bytes() != t3.read_bytes()


def test_sweep_then_pareto_matches_in_process(config_path, tmp_path, capsys):
    sweep_path = tmp_path / "sweep.jsonl"
    rc = main(["sweep", "--config", config_path, "--out", str(sweep_path)])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["points"] == 4

    rc = main(["pareto", "--sweep", str(sweep_path), "--out", str(tmp_path / "p.json")])
    assert rc == 0
    out = json.loads((tmp_path / "p.json").read_text())

    from eplab.sweep import find_markers, pareto_front, read_sweep_path
    sweep = read_sweep_path(sweep_path)
    markers = find_markers(sweep.points, sweep.workload_kind)
    assert out["markers"]["min_energy"] == markers.min_energy.to_json_obj()
    assert out["markers"]["min_latency"] == markers.min_latency.to_json_obj()
    assert [p["delta"] for p in out["frontier"]] == \
        [p.delta for p in pareto_front(sweep.points)]


def test_sweep_identical_artifacts(config_path, tmp_path, capsys):
    s1 = tmp_path / "s1.jsonl"
    s2 = tmp_path / "s2.jsonl"
    assert main(["sweep", "--config", config_path, "--out", str(s1)]) == 0
    assert main(["sweep", "--config", config_path, "--out", str(s2)]) == 0
    assert s1.read_bytes() == s2.read_bytes()


def test_fit_command(config_path, tmp_path, capsys):
    # single-itr sweep at 4+ deltas for a fittable dataset
    doc = json.loads(json.dumps(CONFIG))
    doc["sweep"] = {"delta_values": [0.5, 0.65, 0.8, 1.0], "itr_ticks": [0],
                    "repetitions": 1, "seed_base": 0}
    doc["workload"]["arrival"] = "deterministic"
    doc["workload"]["lambda_per_s"] = 2000.0
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    sweep_path = tmp_path / "sweep.jsonl"
    assert main(["sweep", "--config", str(p), "--out", str(sweep_path)]) == 0
    capsys.readouterr()
    fit_path = tmp_path / "fit.json"
    assert main(["fit", "--sweep", str(sweep_path), "--out", str(fit_path)]) == 0
    report = json.loads(fit_path.read_text())
    assert report["kind"] == "fit-report"
    assert abs(report["alpha_hat"]) < 0.05


def test_trace_stats_totals(config_path, tmp_path, capsys):
    trace_path = tmp_path / "t.trace"
    assert main(["simulate", "--config", config_path, "--out-trace", str(trace_path),
                 "--summary", str(tmp_path / "s.json")]) == 0
    assert main(["trace-stats", "--trace", str(trace_path), "--window-us", "1000",
                 "--out", str(tmp_path / "w.json")]) == 0
    stats = json.loads((tmp_path / "w.json").read_text())
    total_j = sum(w["joules"] for w in stats["windows"])
    assert total_j == pytest.approx(stats["totals"]["joules"], rel=1e-12)
    summary = json.loads((tmp_path / "s.json").read_text())
    assert stats["totals"]["joules"] == pytest.approx(
        summary["total_energy_j"], rel=1e-9)


def test_repo_storage_and_named_artifacts(config_path, tmp_path, capsys):
    repo = tmp_path / "repo"
    assert main(["simulate", "--config", config_path, "--repo", str(repo),
                 "--name", "baseline", "--out-trace", str(tmp_path / "t.trace"),
                 "--summary", str(tmp_path / "s.json")]) == 0
    summary = json.loads((tmp_path / "s.json").read_text())
    digest = summary["trace_digest"]
    assert main(["trace-stats", "--trace", "baseline", "--repo", str(repo),
                 "--window-us", "500", "--out", str(tmp_path / "w.json")]) == 0
    stats = json.loads((tmp_path / "w.json").read_text())
    assert stats["totals"]["joules"] > 0
    from eplab.repo import Repository
    assert Repository(repo).resolve("baseline") == digest


def test_error_lines_are_machine_parsable(tmp_path, capsys):
    rc = main(["simulate", "--config", str(tmp_path / "missing.json")])
    assert rc != 0
    err = capsys.readouterr().err
    assert err.startswith("error: ")
    payload = json.loads(err[len("error: "):])
    assert payload["code"] == "config-missing"

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"sim": {"delta": 2.0}}))
    rc = main(["simulate", "--config", str(bad)])
    assert rc == 1
    err = capsys.readouterr().err
    payload = json.loads(err[len("error: "):])
    assert payload["code"] == "config-invalid"


def test_unknown_config_keys_fail_loud(tmp_path, capsys):
    doc = json.loads(json.dumps(CONFIG))
    doc["sim"]["turbo"] = True
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    rc = main(["simulate", "--config", str(p)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "turbo" in err


def test_overload_exit_code(tmp_path, capsys):
    doc = json.loads(json.dumps(CONFIG))
    doc["workload"] = {"kind": "open", "lambda_per_s": 1e6,
                       "arrival": "deterministic", "request_bytes": 64,
                       "reply_bytes": 64, "app_instructions": 100000.0}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    rc = main(["simulate", "--config", str(p)])
    assert rc == 2
    payload = json.loads(capsys.readouterr().err[len("error: "):])
    assert payload["code"] == "overload"
