"""Hot loops of the request-timeline simulator.

Two passes, both numba-compilable and free of Python objects:

1. _run_timeline_impl walks the request timeline event by event and emits
   a flat list of time segments (what the core was doing, at what power),
   plus NIC consumption/transmission events and interrupt timestamps.
2. _bin_segments_impl folds the segment list into 1 ms bins, per-interrupt
   intervals, and residency totals.

All times are float64 microseconds.  Segment kinds:

    0 service busy   1 unwind busy   2 wake (c-state exit)
    3 interrupt overhead   4 poll spin   5 quiescent awake
    6+s asleep in c-state s

Detection modes: 0 interrupt, 1 hybrid, 2 poll.  Idle modes: 0 always
deepest, 1 latency aware (threshold table against the last observed
interarrival gap), 2 spin.
"""

from __future__ import annotations

import numpy as np

from .backend import NUMBA_ENABLED, maybe_jit

SEG_SERVICE = 0
SEG_UNWIND = 1
SEG_WAKE = 2
SEG_IRQ_OVERHEAD = 3
SEG_SPIN = 4
SEG_QUIESCENT = 5
SEG_SLEEP_BASE = 6

DETECT_INTERRUPT = 0
DETECT_HYBRID = 1
DETECT_POLL = 2

IDLE_DEEPEST = 0
IDLE_LATENCY_AWARE = 1
IDLE_SPIN = 2

STATUS_OK = 0
STATUS_OVERLOAD = 1


def _run_timeline_impl(
    open_loop,            # bool: arrivals precomputed vs closed-loop feedback
    arrivals,             # float64[n_req]: first-byte NIC arrival times (open)
    n_req,                # int
    think_us,             # float: closed-loop client turnaround
    pkt_off,              # float64[P]: per-packet full-receipt offset from first byte
    pkt_bytes,            # float64[P]
    rep_wire_us,          # float
    rep_pkts,             # int
    rep_bytes,            # float
    tpi_us,               # float: microseconds per instruction at this DVFS point
    svc_instr,            # float: request-servicing instructions (os+copy+app+async+reply)
    unwind_instr,
    oh_instr,             # per-interrupt handler overhead instructions
    poll_check_instr,     # instructions per poll-loop iteration
    p_work_w,
    p_detect_w,
    p_q_w,
    detect_mode,
    budget_cap,           # packets consumable per interrupt invocation
    idle_mode,
    n_states,
    cstate_exit_us,       # float64[S]
    cstate_power_w,       # float64[S]
    cstate_threshold_us,  # float64[S]: minimum predicted idle to enter state
    itr_window_us,        # float: 2us x ITR ticks
    overload_limit,       # int: max backlogged requests before erroring (<=0 disables)
):
    P = pkt_off.shape[0]
    total_pkts = n_req * P
    poll_period = poll_check_instr * tpi_us

    latencies = np.zeros(n_req, np.float64)
    detect_us = np.zeros(n_req, np.float64)
    via_irq = np.zeros(n_req, np.uint8)
    arrivals_out = np.zeros(n_req, np.float64)
    if open_loop:
        arrivals_out[:] = arrivals

    seg_cap = 4096
    seg_t0 = np.empty(seg_cap, np.float64)
    seg_t1 = np.empty(seg_cap, np.float64)
    seg_w = np.empty(seg_cap, np.float64)
    seg_i = np.empty(seg_cap, np.float64)
    seg_k = np.empty(seg_cap, np.int8)
    n_seg = 0

    irq_cap = 1024
    irq_ts = np.empty(irq_cap, np.float64)
    n_irq = 0

    rx_cap = 1024
    rx_t = np.empty(rx_cap, np.float64)
    rx_b = np.empty(rx_cap, np.float64)
    rx_d = np.empty(rx_cap, np.int64)
    n_rx = 0

    tx_t = np.empty(n_req, np.float64)
    tx_b = np.empty(n_req, np.float64)
    tx_d = np.empty(n_req, np.int64)
    n_tx = 0

    now = 0.0
    completion = 0.0
    consumed = 0          # global packet index: next unconsumed packet
    budget = 0            # packets left in the current interrupt invocation
    if detect_mode == DETECT_POLL:
        budget = total_pkts + 1
    last_irq = 0.0
    has_irq = False
    just_irqed = False
    skipped = 0
    last_gap = 0.0
    prev_arrival = -1.0
    arrived_ptr = 0       # open loop: arrivals seen by the NIC so far
    status = STATUS_OK
    n_done = 0

    for k in range(n_req):
        # closed loop: arrivals_out[k] was filled by request k-1 (0 for k=0)
        a_k = arrivals_out[k]
        if prev_arrival >= 0.0:
            last_gap = a_k - prev_arrival
        prev_arrival = a_k
        ready_k = a_k + pkt_off[P - 1]
        target = (k + 1) * P
        via = np.uint8(0)
        overloaded = False

        while consumed < target:
            if open_loop and overload_limit > 0:
                while arrived_ptr < n_req and arrivals[arrived_ptr] <= now:
                    arrived_ptr += 1
                if arrived_ptr - k > overload_limit:
                    overloaded = True
                    break

            g = consumed
            j = g // P
            next_arr = arrivals_out[j] + pkt_off[g - j * P]

            if next_arr <= now and budget > 0:
                # device check: consume up to the invocation budget
                hi = consumed + budget
                if hi > target:
                    hi = target
                c = 0
                bsum = 0.0
                while consumed + c < hi:
                    gg = consumed + c
                    jj = gg // P
                    if arrivals_out[jj] + pkt_off[gg - jj * P] <= now:
                        bsum += pkt_bytes[gg - jj * P]
                        c += 1
                    else:
                        break
                consumed += c
                budget -= c
                if not just_irqed:
                    skipped += c
                just_irqed = False
                if n_rx == rx_cap:
                    rx_cap *= 2
                    nt = np.empty(rx_cap, np.float64); nt[:n_rx] = rx_t[:n_rx]; rx_t = nt
                    nb = np.empty(rx_cap, np.float64); nb[:n_rx] = rx_b[:n_rx]; rx_b = nb
                    nd = np.empty(rx_cap, np.int64); nd[:n_rx] = rx_d[:n_rx]; rx_d = nd
                rx_t[n_rx] = now
                rx_b[n_rx] = bsum
                rx_d[n_rx] = c
                n_rx += 1
                continue

            if detect_mode == DETECT_POLL:
                # spin until the first poll-loop check at/after the arrival
                iters = np.ceil((next_arr - now) / poll_period)
                t_chk = now + iters * poll_period
                if t_chk > now:
                    if n_seg == seg_cap:
                        seg_cap *= 2
                        x0 = np.empty(seg_cap, np.float64); x0[:n_seg] = seg_t0[:n_seg]; seg_t0 = x0
                        x1 = np.empty(seg_cap, np.float64); x1[:n_seg] = seg_t1[:n_seg]; seg_t1 = x1
                        xw = np.empty(seg_cap, np.float64); xw[:n_seg] = seg_w[:n_seg]; seg_w = xw
                        xi = np.empty(seg_cap, np.float64); xi[:n_seg] = seg_i[:n_seg]; seg_i = xi
                        xk = np.empty(seg_cap, np.int8); xk[:n_seg] = seg_k[:n_seg]; seg_k = xk
                    seg_t0[n_seg] = now
                    seg_t1[n_seg] = t_chk
                    seg_w[n_seg] = p_work_w
                    seg_i[n_seg] = (t_chk - now) / tpi_us
                    seg_k[n_seg] = SEG_SPIN
                    n_seg += 1
                    now = t_chk
                continue

            # interrupt or hybrid path: the NIC will assert, gated by ITR
            ev = next_arr
            if ev < now:
                ev = now
            if itr_window_us > 0.0 and has_irq and last_irq + itr_window_us > ev:
                irq_t = last_irq + itr_window_us
            else:
                irq_t = ev
            if has_irq and irq_t <= last_irq:
                irq_t = last_irq + 1e-6  # degenerate zero-window re-arm; keep ts strictly increasing

            # idle until the interrupt asserts
            slept = -1
            if irq_t > now:
                if idle_mode == IDLE_SPIN:
                    kind = np.int8(SEG_SPIN)
                    watts = p_work_w
                    instr = (irq_t - now) / tpi_us
                else:
                    if idle_mode == IDLE_DEEPEST:
                        slept = n_states - 1
                    else:
                        for s in range(n_states - 1, -1, -1):
                            if cstate_threshold_us[s] <= last_gap:
                                slept = s
                                break
                    if slept >= 0:
                        kind = np.int8(SEG_SLEEP_BASE + slept)
                        watts = cstate_power_w[slept]
                        instr = 0.0
                    else:
                        kind = np.int8(SEG_QUIESCENT)
                        watts = p_q_w
                        instr = 0.0
                if n_seg == seg_cap:
                    seg_cap *= 2
                    x0 = np.empty(seg_cap, np.float64); x0[:n_seg] = seg_t0[:n_seg]; seg_t0 = x0
                    x1 = np.empty(seg_cap, np.float64); x1[:n_seg] = seg_t1[:n_seg]; seg_t1 = x1
                    xw = np.empty(seg_cap, np.float64); xw[:n_seg] = seg_w[:n_seg]; seg_w = xw
                    xi = np.empty(seg_cap, np.float64); xi[:n_seg] = seg_i[:n_seg]; seg_i = xi
                    xk = np.empty(seg_cap, np.int8); xk[:n_seg] = seg_k[:n_seg]; seg_k = xk
                seg_t0[n_seg] = now
                seg_t1[n_seg] = irq_t
                seg_w[n_seg] = watts
                seg_i[n_seg] = instr
                seg_k[n_seg] = kind
                n_seg += 1
                now = irq_t

            # take the interrupt: wake penalty, then handler overhead
            if n_irq == irq_cap:
                irq_cap *= 2
                ni = np.empty(irq_cap, np.float64); ni[:n_irq] = irq_ts[:n_irq]; irq_ts = ni
            irq_ts[n_irq] = irq_t
            n_irq += 1
            last_irq = irq_t
            has_irq = True
            via = np.uint8(1)
            just_irqed = True
            budget = budget_cap

            if slept >= 0 and cstate_exit_us[slept] > 0.0:
                t_wake = now + cstate_exit_us[slept]
                if n_seg == seg_cap:
                    seg_cap *= 2
                    x0 = np.empty(seg_cap, np.float64); x0[:n_seg] = seg_t0[:n_seg]; seg_t0 = x0
                    x1 = np.empty(seg_cap, np.float64); x1[:n_seg] = seg_t1[:n_seg]; seg_t1 = x1
                    xw = np.empty(seg_cap, np.float64); xw[:n_seg] = seg_w[:n_seg]; seg_w = xw
                    xi = np.empty(seg_cap, np.float64); xi[:n_seg] = seg_i[:n_seg]; seg_i = xi
                    xk = np.empty(seg_cap, np.int8); xk[:n_seg] = seg_k[:n_seg]; seg_k = xk
                seg_t0[n_seg] = now
                seg_t1[n_seg] = t_wake
                seg_w[n_seg] = p_detect_w
                seg_i[n_seg] = 0.0
                seg_k[n_seg] = SEG_WAKE
                n_seg += 1
                now = t_wake
            if oh_instr > 0.0:
                t_oh = now + oh_instr * tpi_us
                if n_seg == seg_cap:
                    seg_cap *= 2
                    x0 = np.empty(seg_cap, np.float64); x0[:n_seg] = seg_t0[:n_seg]; seg_t0 = x0
                    x1 = np.empty(seg_cap, np.float64); x1[:n_seg] = seg_t1[:n_seg]; seg_t1 = x1
                    xw = np.empty(seg_cap, np.float64); xw[:n_seg] = seg_w[:n_seg]; seg_w = xw
                    xi = np.empty(seg_cap, np.float64); xi[:n_seg] = seg_i[:n_seg]; seg_i = xi
                    xk = np.empty(seg_cap, np.int8); xk[:n_seg] = seg_k[:n_seg]; seg_k = xk
                seg_t0[n_seg] = now
                seg_t1[n_seg] = t_oh
                seg_w[n_seg] = p_detect_w
                seg_i[n_seg] = oh_instr
                seg_k[n_seg] = SEG_IRQ_OVERHEAD
                n_seg += 1
                now = t_oh

        if overloaded:
            status = STATUS_OVERLOAD
            n_done = k
            break

        # request fully received and visible to software: service it
        detect_us[k] = now - ready_k
        via_irq[k] = via
        svc_t = svc_instr * tpi_us
        if svc_t > 0.0:
            if n_seg == seg_cap:
                seg_cap *= 2
                x0 = np.empty(seg_cap, np.float64); x0[:n_seg] = seg_t0[:n_seg]; seg_t0 = x0
                x1 = np.empty(seg_cap, np.float64); x1[:n_seg] = seg_t1[:n_seg]; seg_t1 = x1
                xw = np.empty(seg_cap, np.float64); xw[:n_seg] = seg_w[:n_seg]; seg_w = xw
                xi = np.empty(seg_cap, np.float64); xi[:n_seg] = seg_i[:n_seg]; seg_i = xi
                xk = np.empty(seg_cap, np.int8); xk[:n_seg] = seg_k[:n_seg]; seg_k = xk
            seg_t0[n_seg] = now
            seg_t1[n_seg] = now + svc_t
            seg_w[n_seg] = p_work_w
            seg_i[n_seg] = svc_instr
            seg_k[n_seg] = SEG_SERVICE
            n_seg += 1
        svc_end = now + svc_t
        reply_done = svc_end + rep_wire_us
        latencies[k] = reply_done - a_k

        tx_t[n_tx] = svc_end
        tx_b[n_tx] = rep_bytes
        tx_d[n_tx] = rep_pkts
        n_tx += 1

        # reply bytes go out on the wire while the stack unwinds
        unw_t = unwind_instr * tpi_us
        if unw_t > 0.0:
            if n_seg == seg_cap:
                seg_cap *= 2
                x0 = np.empty(seg_cap, np.float64); x0[:n_seg] = seg_t0[:n_seg]; seg_t0 = x0
                x1 = np.empty(seg_cap, np.float64); x1[:n_seg] = seg_t1[:n_seg]; seg_t1 = x1
                xw = np.empty(seg_cap, np.float64); xw[:n_seg] = seg_w[:n_seg]; seg_w = xw
                xi = np.empty(seg_cap, np.float64); xi[:n_seg] = seg_i[:n_seg]; seg_i = xi
                xk = np.empty(seg_cap, np.int8); xk[:n_seg] = seg_k[:n_seg]; seg_k = xk
            seg_t0[n_seg] = svc_end
            seg_t1[n_seg] = svc_end + unw_t
            seg_w[n_seg] = p_work_w
            seg_i[n_seg] = unwind_instr
            seg_k[n_seg] = SEG_UNWIND
            n_seg += 1
        now = svc_end + unw_t

        if reply_done > completion:
            completion = reply_done
        if now > completion:
            completion = now
        n_done = k + 1

        if not open_loop and k + 1 < n_req:
            arrivals_out[k + 1] = reply_done + think_us

    # pad the run to a whole millisecond so periodic samples tile it exactly
    t_end = np.ceil(completion / 1000.0) * 1000.0
    if t_end < 1000.0:
        t_end = 1000.0
    if status == STATUS_OK and t_end > now:
        slept = -1
        if idle_mode == IDLE_SPIN or detect_mode == DETECT_POLL:
            kind = np.int8(SEG_SPIN)
            watts = p_work_w
            instr = (t_end - now) / tpi_us
        else:
            if idle_mode == IDLE_DEEPEST:
                slept = n_states - 1
            else:
                for s in range(n_states - 1, -1, -1):
                    if cstate_threshold_us[s] <= last_gap:
                        slept = s
                        break
            if slept >= 0:
                kind = np.int8(SEG_SLEEP_BASE + slept)
                watts = cstate_power_w[slept]
                instr = 0.0
            else:
                kind = np.int8(SEG_QUIESCENT)
                watts = p_q_w
                instr = 0.0
        if n_seg == seg_cap:
            seg_cap *= 2
            x0 = np.empty(seg_cap, np.float64); x0[:n_seg] = seg_t0[:n_seg]; seg_t0 = x0
            x1 = np.empty(seg_cap, np.float64); x1[:n_seg] = seg_t1[:n_seg]; seg_t1 = x1
            xw = np.empty(seg_cap, np.float64); xw[:n_seg] = seg_w[:n_seg]; seg_w = xw
            xi = np.empty(seg_cap, np.float64); xi[:n_seg] = seg_i[:n_seg]; seg_i = xi
            xk = np.empty(seg_cap, np.int8); xk[:n_seg] = seg_k[:n_seg]; seg_k = xk
        seg_t0[n_seg] = now
        seg_t1[n_seg] = t_end
        seg_w[n_seg] = watts
        seg_i[n_seg] = instr
        seg_k[n_seg] = kind
        n_seg += 1

    return (status, n_done, latencies, detect_us, via_irq, arrivals_out,
            irq_ts[:n_irq].copy(), seg_t0[:n_seg].copy(), seg_t1[:n_seg].copy(),
            seg_w[:n_seg].copy(), seg_i[:n_seg].copy(), seg_k[:n_seg].copy(),
            rx_t[:n_rx].copy(), rx_b[:n_rx].copy(), rx_d[:n_rx].copy(),
            tx_t[:n_tx].copy(), tx_b[:n_tx].copy(), tx_d[:n_tx].copy(),
            skipped, completion, t_end)


def _bin_segments_impl(seg_t0, seg_t1, seg_w, seg_i, seg_k, irq_ts,
                       rx_t, rx_b, rx_d, tx_t, tx_b, tx_d,
                       n_states, t_end):
    """Fold timeline segments into 1 ms bins, per-interrupt intervals, totals.

    Interrupt interval i covers (irq_ts[i-1], irq_ts[i]]: the record
    emitted at an interrupt describes what happened since the previous
    one.  Activity after the last interrupt never surfaces in the
    interrupt stream (the sample stream still accounts for it).
    """
    n_seg = seg_t0.shape[0]
    n_irq = irq_ts.shape[0]
    n_ms = int(np.ceil(t_end / 1000.0 - 1e-12))
    if n_ms < 1:
        n_ms = 1

    ms_joules = np.zeros(n_ms, np.float64)
    ms_instr = np.zeros(n_ms, np.float64)
    ms_exec_us = np.zeros(n_ms, np.float64)

    irq_joules = np.zeros(n_irq, np.float64)
    irq_rxb = np.zeros(n_irq, np.float64)
    irq_rxd = np.zeros(n_irq, np.int64)
    irq_txb = np.zeros(n_irq, np.float64)
    irq_txd = np.zeros(n_irq, np.int64)
    irq_slp_n = np.zeros((n_irq, n_states), np.int64)
    irq_slp_us = np.zeros((n_irq, n_states), np.float64)

    busy_us = 0.0
    detect_us = 0.0
    spin_us = 0.0
    quiesc_us = 0.0
    sleep_us = np.zeros(n_states, np.float64)
    sleep_n = np.zeros(n_states, np.int64)
    total_energy = 0.0
    total_instr = 0.0

    for i in range(n_seg):
        t0 = seg_t0[i]
        t1 = seg_t1[i]
        dur = t1 - t0
        if dur <= 0.0:
            continue
        w = seg_w[i]
        instr = seg_i[i]
        kind = seg_k[i]
        total_energy += w * dur * 1e-6
        total_instr += instr

        executing = kind == SEG_SERVICE or kind == SEG_UNWIND \
            or kind == SEG_IRQ_OVERHEAD or kind == SEG_SPIN
        if kind == SEG_SERVICE or kind == SEG_UNWIND:
            busy_us += dur
        elif kind == SEG_WAKE or kind == SEG_IRQ_OVERHEAD:
            detect_us += dur
        elif kind == SEG_SPIN:
            spin_us += dur
        elif kind == SEG_QUIESCENT:
            quiesc_us += dur
        else:
            s = kind - SEG_SLEEP_BASE
            sleep_us[s] += dur
            sleep_n[s] += 1

        b0 = int(t0 // 1000.0)
        b1 = int(t1 // 1000.0)
        if b1 > n_ms - 1:
            b1 = n_ms - 1
        for b in range(b0, b1 + 1):
            lo = t0 if t0 > b * 1000.0 else b * 1000.0
            hi = t1 if t1 < (b + 1) * 1000.0 else (b + 1) * 1000.0
            ov = hi - lo
            if ov > 0.0:
                ms_joules[b] += w * ov * 1e-6
                ms_instr[b] += instr * ov / dur
                if executing:
                    ms_exec_us[b] += ov

        if n_irq > 0:
            # walk the (prev, cur] interrupt intervals overlapping this segment
            p = np.searchsorted(irq_ts, t0)  # first irq with ts >= t0
            if p < n_irq and irq_ts[p] == t0:
                p += 1  # boundary point belongs to the earlier interval
            while p < n_irq:
                prev = irq_ts[p - 1] if p > 0 else -1.0
                lo = t0 if t0 > prev else prev
                hi = t1 if t1 < irq_ts[p] else irq_ts[p]
                ov = hi - lo
                if ov > 0.0:
                    irq_joules[p] += w * ov * 1e-6
                    if kind >= SEG_SLEEP_BASE:
                        s = kind - SEG_SLEEP_BASE
                        irq_slp_us[p, s] += ov
                        if lo == t0:
                            irq_slp_n[p, s] += 1
                if irq_ts[p] >= t1:
                    break
                p += 1

    if n_irq > 0:
        for i in range(rx_t.shape[0]):
            # searchsorted('left'): an event exactly at an irq timestamp
            # lands on that record, matching the (prev, cur] intervals
            p = np.searchsorted(irq_ts, rx_t[i])
            if p < n_irq:
                irq_rxb[p] += rx_b[i]
                irq_rxd[p] += rx_d[i]
        for i in range(tx_t.shape[0]):
            p = np.searchsorted(irq_ts, tx_t[i])
            if p < n_irq:
                irq_txb[p] += tx_b[i]
                irq_txd[p] += tx_d[i]

    return (ms_joules, ms_instr, ms_exec_us,
            irq_joules, irq_rxb, irq_rxd, irq_txb, irq_txd, irq_slp_n, irq_slp_us,
            busy_us, detect_us, spin_us, quiesc_us, sleep_us, sleep_n,
            total_energy, total_instr)


# Pure-Python references (always available) and the selected hot path.
run_timeline_py = _run_timeline_impl
bin_segments_py = _bin_segments_impl
run_timeline = maybe_jit(_run_timeline_impl)
bin_segments = maybe_jit(_bin_segments_impl)

__all__ = [
    "run_timeline", "bin_segments", "run_timeline_py", "bin_segments_py",
    "NUMBA_ENABLED",
]
