"""Benchmark the compiled kernels against the pure numpy fallback.

Usage: python benchmarks/bench_kernels.py [--seconds 120] [--repeats 5]

Times frame feature extraction and point-label framing over synthetic
16 kHz audio and prints a table with the per-call best of N wall times.
"""

import argparse
import time

import numpy as np

from segwords.features import band_weights
from segwords.kernels import pure, select_backend

SR = 16000
FRAME = 400


def bench(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seconds", type=float, default=120.0,
                        help="audio length per call")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    try:
        compiled, _ = select_backend("compiled")
    except ImportError:
        compiled = None

    rng = np.random.default_rng(0)
    n = int(args.seconds * SR)
    samples = rng.normal(0.0, 1.0, n)
    codes = rng.integers(0, 3, n).astype(np.int8)
    weights = band_weights(SR, 512)

    cases = [
        ("frame_features", (samples, FRAME, weights)),
        ("frame_label_codes", (codes, FRAME, True)),
    ]

    print(f"audio: {args.seconds:.0f} s at {SR} Hz ({n} samples), "
          f"frame {FRAME} samples, best of {args.repeats}")
    print(f"{'kernel':<20} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for name, call_args in cases:
        t_pure = bench(getattr(pure, name), *call_args, repeats=args.repeats)
        if compiled is None:
            print(f"{name:<20} {t_pure * 1e3:>8.1f}ms {'n/a':>10} {'n/a':>8}")
            continue
        t_comp = bench(getattr(compiled, name), *call_args, repeats=args.repeats)
        a = getattr(pure, name)(*call_args)
        b = getattr(compiled, name)(*call_args)
        assert np.allclose(a, b, rtol=1e-9, atol=1e-9), f"{name}: backends disagree"
        print(f"{name:<20} {t_pure * 1e3:>8.1f}ms {t_comp * 1e3:>8.1f}ms "
              f"{t_pure / t_comp:>7.2f}x")


if __name__ == "__main__":
    main()
