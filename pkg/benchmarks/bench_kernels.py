"""
Compare the numba kernels with their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 50]

Part 1 times the two kernels in-process on problem sizes from the
experiments. Part 2 times a full ``estimate_shifts`` call in two fresh
interpreters, one with ``SHIFTFRECHET_NO_JIT=1``.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from shiftfrechet import kernels
from shiftfrechet._jit import NUMBA_AVAILABLE

SIZES = [(20, 7), (100, 7), (100, 32), (500, 64)]

_END_TO_END = """
import json, time
import shiftfrechet
from shiftfrechet.registration import estimate_shifts
from shiftfrechet.smoothing import dft_coeffs
from shiftfrechet.synth import simulate
cv = dft_coeffs(simulate("stationary", 1024, {J}, 1, sigma=8.0), 7)
estimate_shifts(cv)  # warm-up (compilation or cache load)
t = time.perf_counter()
for _ in range({reps}):
    estimate_shifts(cv)
print(json.dumps({{"backend": shiftfrechet.backend_name(),
                   "seconds": (time.perf_counter() - t) / {reps}}}))
"""


def problem(J, lam, rng):
    pos = rng.normal(size=(J, lam)) + 1j * rng.normal(size=(J, lam))
    c = np.concatenate([np.conj(pos[:, ::-1]), rng.normal(size=(J, 1)), pos], axis=1)
    return c, np.arange(-lam, lam + 1, dtype=float), rng.uniform(-0.2, 0.2, J)


def per_call(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=repeat, repeat=3)) / repeat


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    cand = -0.5 + np.arange(64) / 64
    print(f"{'kernel':<16}{'J':>5}{'lam':>5}{'numpy us':>12}{'numba us':>12}{'speedup':>9}")
    for J, lam in SIZES:
        c, ks, th = problem(J, lam, rng)
        abar = c.mean(axis=0)
        cases = {
            "criterion_grad": lambda jit: kernels.criterion_grad(c, ks, th, use_jit=jit),
            "align_sweep": lambda jit: kernels.align_sweep(c, ks, abar, cand, th, use_jit=jit),
        }
        for name, call in cases.items():
            t_np = per_call(lambda: call(False), repeat)
            t_nb = per_call(lambda: call(True), repeat) if NUMBA_AVAILABLE else float("nan")
            print(f"{name:<16}{J:>5}{lam:>5}{t_np * 1e6:>12.1f}{t_nb * 1e6:>12.1f}{t_np / t_nb:>9.2f}")


def bench_end_to_end(J, reps):
    out = {}
    for no_jit in (True, False):
        env = dict(os.environ)
        env.pop("SHIFTFRECHET_NO_JIT", None)
        if no_jit:
            env["SHIFTFRECHET_NO_JIT"] = "1"
        proc = subprocess.run([sys.executable, "-c", _END_TO_END.format(J=J, reps=reps)],
                              env=env, capture_output=True, text=True, check=True)
        r = json.loads(proc.stdout)
        out[r["backend"]] = r["seconds"]
    print(f"\nestimate_shifts, stationary data, n=1024, J={J}, lam=7 (mean of {reps} calls)")
    for name, sec in out.items():
        print(f"  {name:<6} {sec * 1e3:9.1f} ms")
    if len(out) == 2:
        print(f"  speedup {out['numpy'] / out['numba']:.2f}x")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    p.add_argument("--repeat", type=int, default=50)
    p.add_argument("--J", type=int, default=100)
    p.add_argument("--reps", type=int, default=5)
    a = p.parse_args()
    bench_kernels(a.repeat)
    bench_end_to_end(a.J, a.reps)


if __name__ == "__main__":
    main()
