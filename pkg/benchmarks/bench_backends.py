#!/usr/bin/env python3
"""Compare the numba-compiled and pure-Python simulation kernels.

Runs the same workloads through both paths, checks the outputs agree
bit-for-bit, and prints a timing table.  The package-level switch is the
EPLAB_NO_NUMBA=1 environment variable; this script drives both paths
directly in one process.

Usage: python benchmarks/bench_backends.py [--requests N]
"""

import argparse
import time

import numpy as np

from eplab.backend import NUMBA_ENABLED
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


def scenarios(n_requests):
    open_cfg = SimConfig(
        seed=1, dvfs=0.8, power=PowerModel(p_quiescent=0.3), base_ips=1e9,
        cstates=CStateModel((CState("C1", 2.0, 1.0), CState("C7", 30.0, 0.1))),
        os=OsProfile(), nic=NicModel(itr=ItrSetting(4)),
        stop=StopCondition(requests=n_requests))
    open_wl = WorkloadSpec(kind="open", lam=50000.0, arrival_process="poisson",
                           request_size=256, reply_size=512,
                           app_instructions=3000.0)
    closed_cfg = SimConfig(
        seed=1, dvfs=0.6, power=PowerModel(), base_ips=1e9,
        cstates=CStateModel((CState("C1", 2.0, 1.0),)),
        os=OsProfile(os_req_instructions=500.0, os_reply_instructions=300.0,
                     unwind_instructions=600.0,
                     interrupt_overhead_instructions=400.0),
        nic=NicModel(), stop=StopCondition(requests=n_requests))
    closed_wl = WorkloadSpec(kind="closed", iterations=n_requests,
                             client_think_us=2.0, request_size=64, reply_size=64,
                             app_instructions=500.0)
    return [("open/poisson/itr4", open_cfg, open_wl),
            ("closed/run-to-completion", closed_cfg, closed_wl)]


def bench(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--requests", type=int, default=20000)
    args = parser.parse_args()

    if not NUMBA_ENABLED:
        print("numba backend disabled (EPLAB_NO_NUMBA set or numba missing); "
              "timing the pure-Python path only")

    print(f"{'scenario':<28} {'requests':>9} {'python':>10} {'numba':>10} {'speedup':>8}")
    for name, cfg, wl in scenarios(args.requests):
        res_py = simulate(cfg, wl, use_python_kernel=True)
        t_py = bench(lambda: simulate(cfg, wl, use_python_kernel=True))
        if NUMBA_ENABLED:
            res_nb = simulate(cfg, wl)  # also triggers JIT compilation
            assert np.array_equal(res_py.latencies_us, res_nb.latencies_us), \
                "backends disagree on latencies"
            assert res_py.total_energy_j == res_nb.total_energy_j, \
                "backends disagree on energy"
            t_nb = bench(lambda: simulate(cfg, wl))
            print(f"{name:<28} {args.requests:>9} {t_py:>9.3f}s {t_nb:>9.3f}s "
                  f"{t_py / t_nb:>7.1f}x")
        else:
            print(f"{name:<28} {args.requests:>9} {t_py:>9.3f}s {'-':>10} {'-':>8}")
    if NUMBA_ENABLED:
        print("outputs bit-identical across backends")


if __name__ == "__main__":
    main()
