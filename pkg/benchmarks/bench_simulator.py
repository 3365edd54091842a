#!/usr/bin/env python3
"""Benchmark: numba-compiled Gillespie kernel vs the pure-Python fallback.

Runs the same trajectory workload through both paths (the fallback is
selected with QBOSON_DISABLE_NUMBA=1 in a subprocess) and reports events
per second.  Both paths consume identical random streams, so the event
counts must agree exactly; the script checks that too.
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = """
import json, time
from fractions import Fraction as F
from qboson.stationary import model
from qboson.simulate import SimConfig, run_trajectory, NUMBA_ENABLED

m = model({N}, {p}, F(1, 2))
cfg = SimConfig(params=m, t_measure={t}, reps=2, seed={seed}, t_burn=50.0)
run_trajectory(cfg, 0)   # warm-up (numba compilation happens here)
t0 = time.perf_counter()
events = 0
for rep in range({reps}):
    events += run_trajectory(cfg, rep).events
dt = time.perf_counter() - t0
print(json.dumps({{"numba": NUMBA_ENABLED, "events": events, "secs": dt}}))
"""


def run(disable_numba: bool, N: int, p: int, t: float, reps: int,
        seed: int) -> dict:
    env = dict(os.environ, QBOSON_DISABLE_NUMBA="1" if disable_numba else "0")
    code = WORKLOAD.format(N=N, p=p, t=t, reps=reps, seed=seed)
    proc = subprocess.run([sys.executable, "-c", code], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--p", type=int, default=16)
    ap.add_argument("--t-measure", type=float, default=4000.0)
    ap.add_argument("--reps", type=int, default=4)
    ap.add_argument("--seed", type=int, default=123)
    args = ap.parse_args()

    rows = []
    for disable in (False, True):
        label = "pure-python" if disable else "numba"
        print(f"running {label} path ...", flush=True)
        res = run(disable, args.n, args.p, args.t_measure, args.reps,
                  args.seed)
        rate = res["events"] / res["secs"]
        rows.append((label, res))
        print(f"  {label:12s} numba={res['numba']} events={res['events']} "
              f"time={res['secs']:.3f}s rate={rate / 1e6:.2f} M events/s")

    ev_numba = rows[0][1]["events"]
    ev_pure = rows[1][1]["events"]
    if ev_numba != ev_pure:
        print(f"WARNING: event counts differ ({ev_numba} vs {ev_pure}); "
              "the paths did not consume identical streams")
        return 1
    speedup = rows[1][1]["secs"] / rows[0][1]["secs"]
    print(f"identical event counts; numba speedup: {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
