#!/usr/bin/env python3
"""Record API responses into frontend/test/fixtures/.

Builds a small repository (one sweep, one trace) with fixed seeds, runs
the real HTTP service against it in-process, and snapshots the responses
the explorer consumes.  Rerun after changing the API or the fixture
scenario; outputs are deterministic.
"""

import io
import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from eplab import tracelog
from eplab.engine import (
    CState,
    CStateModel,
    ItrSetting,
    NicModel,
    OsProfile,
    SimConfig,
    StopCondition,
    WorkloadSpec,
    simulate,
)
from eplab.model import PowerModel
from eplab.repo import Repository
from eplab.service import create_app
from eplab.sweep import SweepGrid, run_sweep, write_sweep_file

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"


def build_repo(root):
    repo = Repository(root)
    cfg = SimConfig(
        seed=7, dvfs=1.0,
        power=PowerModel(p_static=10.0, p_dyn=20.0, p_quiescent=0.5,
                         detect_tracks_work=True),
        base_ips=1e9,
        cstates=CStateModel((CState("C1", 2.0, 1.0), CState("C6", 30.0, 0.05))),
        os=OsProfile(), nic=NicModel(),
        stop=StopCondition(requests=400))
    wl = WorkloadSpec(kind="open", lam=10000.0, arrival_process="poisson",
                      request_size=64, reply_size=64, app_instructions=3000.0)
    grid = SweepGrid(delta_values=(0.5, 0.7, 1.0),
                     itr_values=(ItrSetting(0), ItrSetting(8), ItrSetting(100)),
                     repetitions=2, seed_base=7)
    points = run_sweep(grid, cfg, wl)
    buf = io.StringIO()
    write_sweep_file(buf, points, grid, cfg, wl)
    sweep_digest = repo.put_text(buf.getvalue(), "sweep", name="fixture-sweep")
    res = simulate(cfg, wl)
    trace_digest = repo.put_text(tracelog.dumps(res.trace), "trace",
                                 name="fixture-trace")
    return sweep_digest, trace_digest


def dump(name, obj):
    FIXTURES.mkdir(parents=True, exist_ok=True)
    path = FIXTURES / name
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")


def main():
    with tempfile.TemporaryDirectory() as root:
        sweep_digest, trace_digest = build_repo(root)
        client = TestClient(create_app(root))

        dump("descriptor.json", client.get("/api/v1").json())
        dump("sweeps.json", client.get("/api/v1/sweeps").json())
        dump("sweep_points.json",
             client.get(f"/api/v1/sweeps/{sweep_digest}/points").json())
        dump("markers.json",
             client.get(f"/api/v1/sweeps/{sweep_digest}/markers").json())
        dump("traces.json", client.get("/api/v1/traces").json())
        dump("trace_window.json",
             client.get(f"/api/v1/traces/{trace_digest}/window",
                        params={"window_us": 4000.0}).json())
        dump("trace_window_zoom.json",
             client.get(f"/api/v1/traces/{trace_digest}/window",
                        params={"window_us": 2000.0}).json())

        eval_body = {"scenario": {"lambda_per_s": 1000.0, "f_detect": 0.1,
                                  "f_work_max": 0.5, "alpha": 0.0, "beta": 0.0,
                                  "power": {"p_static_w": 10.0, "p_dyn_w": 20.0}},
                     "delta_grid": [round(0.05 * i, 2) for i in range(1, 21)]}
        dump("eval_model_request.json", eval_body)
        dump("eval_model.json",
             client.post("/api/v1/model/eval", json=eval_body).json())
        # slider variants used by the curve-morphing contract test
        alpha_body = json.loads(json.dumps(eval_body))
        alpha_body["scenario"]["alpha"] = 1.0
        dump("eval_model_alpha1.json",
             client.post("/api/v1/model/eval", json=alpha_body).json())
        beta_body = json.loads(json.dumps(eval_body))
        beta_body["scenario"]["beta"] = 1.0
        dump("eval_model_beta1.json",
             client.post("/api/v1/model/eval", json=beta_body).json())
        bad = client.post("/api/v1/model/eval",
                          json={"scenario": {"f_detect": 2.0}, "delta_grid": [1.0]})
        dump("eval_model_error.json",
             {"status": bad.status_code, "body": bad.json()})


if __name__ == "__main__":
    main()
