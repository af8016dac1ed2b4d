"""Timing harness for the compiled kernels against their plain-Python twins.

Both variants are the same source function, so besides the speed table this
script asserts the outputs agree bit for bit. Run from the repo root:

    python benchmarks/bench_kernels.py
    WARPGEO_DISABLE_NUMBA=1 python benchmarks/bench_kernels.py   # python only
"""

import argparse
import time

import numpy as np

from warpgeo import _kernels
from warpgeo._kernels import _hermite_eval_py, _rk4_warp_py


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def rk4_args(n_steps):
    # generalized Schwarzschild profile, n = 5
    return (5.0, 1.0, 0.0, 0.0, 1.0, 0.0, 5.0 / n_steps, n_steps, 1e-8)


def hermite_args(n_query):
    args = rk4_args(5000)
    ts, ps, ds, count, _ = _rk4_warp_py(*args)
    t = ts[:count]
    phi = ps[:count]
    dphi = ds[:count]
    d2phi = -(2.0 * (dphi ** 2 - 1.0)) / (2.0 * phi)
    query = np.linspace(t[0], t[-1], n_query)
    return (t, t[0], args[6], phi, dphi, d2phi, query)


def fmt(seconds):
    if seconds < 1e-3:
        return "%7.1f us" % (seconds * 1e6)
    if seconds < 1.0:
        return "%7.2f ms" % (seconds * 1e3)
    return "%7.3f s " % seconds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if not _kernels.USING_NUMBA:
        reason = "disabled by env" if _kernels.HAS_NUMBA else "numba not installed"
        print("compiled path unavailable (%s); timing python only" % reason)

    cases = [
        ("rk4 5e3 steps", _rk4_warp_py, rk4_args(5000)),
        ("rk4 5e4 steps", _rk4_warp_py, rk4_args(50000)),
        ("rk4 5e5 steps", _rk4_warp_py, rk4_args(500000)),
        ("hermite 1e5 pts", _hermite_eval_py, hermite_args(100000)),
        ("hermite 1e6 pts", _hermite_eval_py, hermite_args(1000000)),
    ]
    compiled = {
        _rk4_warp_py: _kernels.rk4_warp if _kernels.USING_NUMBA else None,
        _hermite_eval_py: _kernels.hermite_eval if _kernels.USING_NUMBA else None,
    }

    header = "%-16s %10s %10s %8s" % ("case", "python", "compiled", "speedup")
    print(header)
    print("-" * len(header))
    for name, py_fn, fn_args in cases:
        t_py = best_of(lambda: py_fn(*fn_args), args.repeats)
        jit_fn = compiled[py_fn]
        if jit_fn is None:
            print("%-16s %10s %10s %8s" % (name, fmt(t_py), "-", "-"))
            continue
        jit_fn(*fn_args)  # compile outside the timed region
        t_jit = best_of(lambda: jit_fn(*fn_args), args.repeats)
        ref = py_fn(*fn_args)
        out = jit_fn(*fn_args)
        for a, b in zip(ref, out):
            assert np.array_equal(np.asarray(a), np.asarray(b)), name
        print("%-16s %10s %10s %7.1fx" % (name, fmt(t_py), fmt(t_jit),
                                          t_py / t_jit))


if __name__ == "__main__":
    main()
