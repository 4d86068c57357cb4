#!/usr/bin/env python3
"""Benchmark the Monte Carlo kernels: numba JIT vs pure numpy.

Runs the same seeded stability estimation in two subprocesses (the backend
is chosen at import time via FEATMATCH_BACKEND) and reports wall times and
agreement.  Usage: python benchmarks/bench_mc.py [--samples N] [--repeat R]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOAD = """
import json, sys, time
from featmatch import _mc
from featmatch.gda import Strategy, run_gda
from featmatch.instances import gen_random
from featmatch.prob import pros_monte_carlo

samples = int(sys.argv[1])
repeat = int(sys.argv[2])

cases = []
for seed in range(8):
    inst = gen_random(4, 4, seed=seed)
    m, _ = run_gda(inst, Strategy.HERF)
    cases.append((inst, m))

# warm-up pass so numba compilation cost is reported separately
t0 = time.perf_counter()
pros_monte_carlo(cases[0][0], cases[0][1], samples=1000, seed=0)
warmup = time.perf_counter() - t0

values = []
t0 = time.perf_counter()
for _ in range(repeat):
    for inst, m in cases:
        values.append(pros_monte_carlo(inst, m, samples=samples, seed=7).value)
elapsed = time.perf_counter() - t0
print(json.dumps({
    "backend": _mc.backend_name(),
    "warmup_s": warmup,
    "elapsed_s": elapsed,
    "per_call_ms": 1000 * elapsed / (repeat * len(cases)),
    "checksum": sum(values),
}))
"""


def run_backend(backend: str, samples: int, repeat: int) -> dict:
    env = dict(os.environ, FEATMATCH_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", WORKLOAD, str(samples), str(repeat)],
        env=env,
        capture_output=True,
        text=True,
    )
    if out.returncode != 0:
        raise RuntimeError(f"{backend} run failed:\n{out.stderr}")
    return json.loads(out.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    results = []
    for backend in ("numpy", "auto"):
        try:
            results.append(run_backend(backend, args.samples, args.repeat))
        except RuntimeError as exc:
            print(exc, file=sys.stderr)
    for r in results:
        print(
            f"{r['backend']:>6}: {r['per_call_ms']:8.2f} ms/call "
            f"(total {r['elapsed_s']:.2f}s, warmup {r['warmup_s']:.2f}s)"
        )
    if len(results) == 2:
        if results[0]["checksum"] != results[1]["checksum"]:
            print("MISMATCH: backends disagree", file=sys.stderr)
            return 1
        speedup = results[0]["per_call_ms"] / results[1]["per_call_ms"]
        print(f"speedup ({results[1]['backend']} over numpy): {speedup:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
