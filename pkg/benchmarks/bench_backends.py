"""Benchmark the compiled numerical backend against the NumPy one.

Times the six shared backend functions on synthetic inputs of a few
sizes, then one end-to-end center-objective workload per backend in a
subprocess (backend selection is fixed at import time).

    python3 benchmarks/bench_backends.py --repeat 5
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from ppdepth._backend import _numpy_backend

try:
    from ppdepth._backend import _fastkernels
except ImportError:
    _fastkernels = None

C1, C2, T = 1.0, 10.0, 100.0


def _inputs(k: int, rng: np.random.Generator) -> dict:
    return {
        "x": np.sort(rng.uniform(0.0, T, k)),
        "y": np.sort(rng.uniform(0.0, T, k)),
        "grid": np.linspace(0.0, T, 1025),
    }


def _tasks(k: int, rng: np.random.Generator):
    d = _inputs(k, rng)
    u = float(d["x"][0])
    v = float(d["y"][0])
    return [
        ("cross_integral", lambda m: m.cross_integral(u, v, C1, C2, T)),
        ("point_cross_sum", lambda m: m.point_cross_sum(u, d["y"], C1, C2, T)),
        ("gram_sum", lambda m: m.gram_sum(d["x"], d["y"], C1, C2, T)),
        ("g_pair", lambda m: m.g_pair(u, v, C1, C2, T)),
        ("g_rowsums", lambda m: m.g_rowsums(d["x"], d["y"], C1, C2, T)),
        ("curve_values", lambda m: m.curve_values(d["grid"], d["x"], C1, C2, T)),
    ]


def _time(fn, repeat: int) -> float:
    number = max(1, int(0.02 / max(min(timeit.repeat(fn, number=1, repeat=3)), 1e-9)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


_END_TO_END = """
import json
import time
import numpy as np
from ppdepth import KernelSpec, simulate_hpp
from ppdepth._backend import backend_name
from ppdepth.center import SsdObjective, combined_center

spec = KernelSpec(c1=1.0, c2=10.0, T=100.0)
sample = simulate_hpp(0.045, 100.0, 100, seed=7)
obj = SsdObjective(sample, spec)
t = np.array([20.0, 40.0, 60.0, 80.0])
t0 = time.perf_counter()
for _ in range(200):
    obj.ssd_events(t)
    obj.gradient_events(t)
eval_s = (time.perf_counter() - t0) / 200
t0 = time.perf_counter()
est = combined_center(obj, seed=7)
search_s = time.perf_counter() - t0
print(json.dumps({"backend": backend_name(), "eval_s": eval_s,
                  "search_s": search_s, "ssd": est.ssd}))
"""


def _end_to_end(backend: str) -> dict:
    env = dict(os.environ, PPDEPTH_BACKEND=backend)
    res = subprocess.run(
        [sys.executable, "-c", _END_TO_END], capture_output=True, text=True, env=env, check=True
    )
    return json.loads(res.stdout)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timeit repeats (default 5)")
    parser.add_argument("--sizes", default="4,16,64", help="event counts, comma separated")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _fastkernels is None:
        print("compiled extension not built; only the NumPy backend is available")

    rng = np.random.default_rng(args.seed)
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'function':<16} {'k':>4} {'numpy':>12} {'compiled':>12} {'speedup':>8}")
    for k in sizes:
        for name, call in _tasks(k, rng):
            t_np = _time(lambda: call(_numpy_backend), args.repeat)
            if _fastkernels is None:
                print(f"{name:<16} {k:>4} {t_np * 1e6:>10.2f}us {'-':>12} {'-':>8}")
                continue
            t_c = _time(lambda: call(_fastkernels), args.repeat)
            print(
                f"{name:<16} {k:>4} {t_np * 1e6:>10.2f}us {t_c * 1e6:>10.2f}us "
                f"{t_np / t_c:>7.1f}x"
            )

    print("\nend to end (100-observation center objective):")
    rows = [_end_to_end("numpy")]
    if _fastkernels is not None:
        rows.append(_end_to_end("compiled"))
    for row in rows:
        print(
            f"  {row['backend']:<9} ssd+gradient {row['eval_s'] * 1e3:8.3f}ms"
            f"   combined search {row['search_s']:7.3f}s   (ssd {row['ssd']:.2f})"
        )
    if len(rows) == 2:
        if rows[0]["ssd"] != rows[1]["ssd"]:
            rel = abs(rows[0]["ssd"] - rows[1]["ssd"]) / rows[0]["ssd"]
            print(f"  note: backend SSDs differ by rel {rel:.2e}")
        print(
            f"  speedup: eval {rows[0]['eval_s'] / rows[1]['eval_s']:.1f}x, "
            f"search {rows[0]['search_s'] / rows[1]['search_s']:.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
