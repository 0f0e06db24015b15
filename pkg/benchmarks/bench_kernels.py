"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 512,4096,65536] [--repeat 50] [--json out.json]

Also times one full residual-constrained solve with each backend selected
through VFSOLVE_DISABLE_NUMBA in a subprocess.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from vfsolve.kernels import numba_impl, numpy_impl

CASES = {
    "proj_l1": lambda x: (x, 0.3 * np.abs(x).sum()),
    "proj_nonneg_l1": lambda x: (x, 0.3 * np.abs(x).sum()),
    "proj_huber_level": lambda x: (x, 0.5, 0.1 * x.size),
    "huber_sum": lambda x: (x, 0.5),
    "huber_grad": lambda x: (x, 0.5),
    "student_t_sum": lambda x: (x, 1.0),
    "student_t_grad": lambda x: (x, 1.0),
}

SOLVE_SNIPPET = """
import time
from vfsolve.experiment import ExperimentConfig, build_problem
from vfsolve.kernels import BACKEND, warmup
from vfsolve.pareto import solve_constrained
from vfsolve.penalties import parse_misfit
warmup()
cfg = ExperimentConfig()
total = 0.0
for text in cfg.misfits:
    problem, bundle = build_problem(cfg, parse_misfit(text))
    t = time.perf_counter()
    solve_constrained(problem, bundle.sigmas[text], cfg.pareto_options())
    total += time.perf_counter() - t
print(BACKEND, total)
"""


def best_time(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def solve_time(disable_numba: bool):
    env = dict(os.environ, VFSOLVE_DISABLE_NUMBA="1" if disable_numba else "0")
    out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="512,4096,65536")
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--json")
    ap.add_argument("--skip-solve", action="store_true")
    args = ap.parse_args(argv)
    if numba_impl is None:
        sys.exit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    rows = []
    print(f"{'kernel':<18}{'n':>8}{'numpy [us]':>14}{'numba [us]':>14}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        x = rng.standard_normal(n)
        for name, make in CASES.items():
            a = make(x)
            t_np = best_time(getattr(numpy_impl, name), a, args.repeat)
            t_nb = best_time(getattr(numba_impl, name), a, args.repeat)
            rows.append({"kernel": name, "n": n, "numpy_s": t_np, "numba_s": t_nb})
            print(f"{name:<18}{n:>8}{t_np * 1e6:>14.1f}{t_nb * 1e6:>14.1f}{t_np / t_nb:>10.2f}")

    result = {"kernels": rows}
    if not args.skip_solve:
        for flag in (True, False):
            backend, secs = solve_time(flag)
            result[f"solve_{backend}_s"] = secs
            print(f"default experiment, one seed, {backend} backend: {secs:.3f} s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(result, fh, indent=2)


if __name__ == "__main__":
    main()
