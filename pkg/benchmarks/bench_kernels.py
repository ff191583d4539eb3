"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from biharmonic_control import _kernels_py as fallback

try:
    from biharmonic_control import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(rng):
    lam = np.sort(rng.uniform(-10.0, 4000.0, 16))
    amp = rng.normal(size=16) + 1j * rng.normal(size=16)
    t = np.linspace(0.0, 1.0, 200_000)
    gain = rng.uniform(0.5, 10.0, 16)
    y0 = rng.normal(size=16) + 1j * rng.normal(size=16)
    return {
        "expsum 16 x 2e5": lambda k: k.expsum(lam, amp, t),
        "cross_gram 400 x 400": lambda k: k.cross_gram(np.linspace(-5, 9000, 400), np.linspace(-5, 9000, 400), 1.0),
        "rk4_drive 16 modes, 1e6 steps": lambda k: k.rk4_drive(lam, gain, y0, lam[:8], amp[:8], 1.0, 1_000_000),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the fallback can be timed")
    print(f"{'kernel':32s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speed-up':>9s} {'max |diff|':>11s}")
    for name, run in cases(np.random.default_rng(0)).items():
        tp, outp = best_of(lambda: run(fallback), args.repeat)
        if compiled is None:
            print(f"{name:32s} {tp:10.4f} {'-':>11s} {'-':>9s} {'-':>11s}")
            continue
        tc, outc = best_of(lambda: run(compiled), args.repeat)
        diff = float(np.max(np.abs(np.asarray(outp) - np.asarray(outc))))
        print(f"{name:32s} {tp:10.4f} {tc:11.4f} {tp / tc:8.1f}x {diff:11.1e}")


if __name__ == "__main__":
    main()
