"""Timing comparison of the compiled and NumPy hot-kernel backends.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

The three kernels dominate FEM assembly: pointwise evaluation of the
log-power integrand, its derivative, and the log-space evaluation used by
the cutoff machinery.  Each is timed on random gradient-magnitude samples
at several sizes, best-of-repeats, for every importable backend.
"""

import time

import numpy as np

from dpgap.kernels import available_backends
from dpgap.orlicz import LogPower

SIZES = (10_000, 100_000, 1_000_000)
REPEATS = 7


def _time(fn, *args):
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _bench_integrand(phi, backends, rng):
    params = (phi.p, phi.gamma, phi.scale, *phi._knot)
    for n in SIZES:
        t = np.abs(rng.lognormal(0.0, 2.0, n))
        ln_t = np.log(t)
        rows = [
            ("logpower_eval", lambda b, m=None: b.logpower_eval(t, *params)),
            ("logpower_deriv", lambda b: b.logpower_deriv(t, *params)),
            ("logpower_log_eval",
             lambda b: b.logpower_log_eval(ln_t, phi.p, phi.gamma, phi.scale)),
        ]
        for label, call in rows:
            times = {name: _time(call, mod)
                     for name, mod in sorted(backends.items())}
            ratio = (times["numpy"] / times["cython"]
                     if {"numpy", "cython"} <= set(times) else float("nan"))
            print(f"{label:<18}{n:>10}" + "".join(
                f"{times[name] * 1e3:>12.3f}ms" for name in sorted(times))
                + f"{ratio:>9.2f}x")

        # agreement check so the benchmark doubles as a smoke test
        ref = None
        for name, mod in sorted(backends.items()):
            val = np.asarray(mod.logpower_eval(t, *params))
            if ref is None:
                ref = val
            else:
                np.testing.assert_allclose(val, ref, rtol=1e-13)


def main():
    backends = available_backends()
    rng = np.random.default_rng(0)
    print(f"backends: {', '.join(sorted(backends))}")
    for phi in (LogPower(2.0, 2.0), LogPower(2.5, -1.3)):
        print(f"\nintegrand: t^{phi.p} log^{phi.gamma}(e+t)")
        print(f"{'kernel':<18}{'n':>10}" + "".join(
            f"{name:>14}" for name in sorted(backends)) + f"{'speedup':>10}")
        _bench_integrand(phi, backends, rng)
    print("\nbackend outputs agree to rtol 1e-13")


if __name__ == "__main__":
    main()
