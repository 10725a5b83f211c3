"""Compare the numba and pure-numpy kernel backends.

The backend is fixed at import time by ``LANDAULAB_BACKEND``, so each backend
runs in its own interpreter.  Usage::

    python3 benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from landaulab import kernels
from landaulab._accel import backend

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
x = np.linspace(-12.0, 12.0, 4001)
r = np.linspace(0.0, 60.0, 4001)
a = rng.standard_normal((120, 120))
a = a + a.T

cases = {
    "hermite_table(200, 4001 pts)": lambda: kernels.hermite_table(200, x),
    "laguerre_table(120, m=5, 4001 pts)": lambda: kernels.laguerre_table(120, 5, r),
    "jacobi_eigh(120x120)": lambda: kernels.jacobi_eigh(a),
}


def best_of(fn, n):
    times = []
    for _ in range(n):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


out = {"backend": backend(), "timings": {}}
for name, fn in cases.items():
    fn()  # warm-up (includes compilation for numba)
    out["timings"][name] = best_of(fn, repeat)
print(json.dumps(out))
"""


def run(backend, repeat):
    env = dict(os.environ, LANDAULAB_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    results = {b: run(b, args.repeat) for b in ("numba", "numpy")}
    names = list(results["numba"]["timings"])
    print(f"{'kernel':40s} {'numba [s]':>12s} {'numpy [s]':>12s} {'speedup':>9s}")
    for n in names:
        tn = results["numba"]["timings"][n]
        tp = results["numpy"]["timings"][n]
        print(f"{n:40s} {tn:12.5f} {tp:12.5f} {tp / tn:9.1f}")
    return results


if __name__ == "__main__":
    main()
