"""Time the numba-jitted kernels against their pure-python/numpy fallbacks.

Runs both paths regardless of the SOLARCAST_NUMBA flag so one invocation
reports the speedup directly.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from solarcast._kernels import NUMBA_ENABLED, _css_residuals_impl, _mlp_epoch_impl


def _time(fn, repeats, *args):
    fn(*args)  # warm up (JIT compile / cache touch)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def bench_css(n_points, repeats, jitted):
    rng = np.random.default_rng(0)
    w = rng.normal(0, 50, n_points)
    ar_lags = np.array([1, 2, 24, 25, 26], dtype=np.int64)
    ar_coefs = np.array([-0.5, 0.2, -0.3, 0.15, -0.06])
    ma_lags = np.array([1, 24, 25], dtype=np.int64)
    ma_coefs = np.array([0.4, -0.6, -0.24])
    args = (w, ar_lags, ar_coefs, ma_lags, ma_coefs, 0.3)

    python_s = _time(_css_residuals_impl, repeats, *args)
    rows = [("css_residuals", "python", python_s)]
    if jitted is not None:
        rows.append(("css_residuals", "numba", _time(jitted, repeats, *args)))
    return rows


def bench_mlp(n_rows, width, hidden, repeats, jitted):
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 1, (n_rows, width))
    y = rng.uniform(0, 1, n_rows)
    order = rng.permutation(n_rows).astype(np.int64)

    def fresh_state():
        r = np.random.default_rng(2)
        w1 = r.uniform(-0.5, 0.5, (hidden, width))
        return [w1, r.uniform(-0.5, 0.5, hidden), r.uniform(-0.5, 0.5, hidden), np.array([0.1]),
                np.zeros((hidden, width)), np.zeros(hidden), np.zeros(hidden), np.zeros(1)]

    def run(fn):
        state = fresh_state()
        return _time(lambda: fn(x, y, order, *state, 0.2, 0.3), repeats)

    def _time(fn, reps=repeats):
        fn()
        start = time.perf_counter()
        for _ in range(reps):
            fn()
        return (time.perf_counter() - start) / reps

    rows = [("mlp_epoch", "python", run(_mlp_epoch_impl))]
    if jitted is not None:
        rows.append(("mlp_epoch", "numba", run(jitted)))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description="Benchmark jitted kernels vs numpy fallbacks")
    parser.add_argument("--points", type=int, default=35_000, help="CSS residual series length")
    parser.add_argument("--rows", type=int, default=8_000, help="MLP epoch row count")
    parser.add_argument("--width", type=int, default=41)
    parser.add_argument("--hidden", type=int, default=11)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    jit_css = jit_mlp = None
    try:
        from numba import njit

        jit_css = njit(cache=True)(_css_residuals_impl)
        jit_mlp = njit(cache=True)(_mlp_epoch_impl)
    except ImportError:
        print("numba not importable; timing the python path only")

    rows = bench_css(args.points, args.repeats, jit_css)
    rows += bench_mlp(args.rows, args.width, args.hidden, args.repeats, jit_mlp)

    print(f"env SOLARCAST_NUMBA path active: {'numba' if NUMBA_ENABLED else 'python'}")
    print(f"{'kernel':<16} {'path':<8} {'sec/call':>12}")
    by_kernel = {}
    for kernel, path, seconds in rows:
        print(f"{kernel:<16} {path:<8} {seconds:>12.6f}")
        by_kernel.setdefault(kernel, {})[path] = seconds
    for kernel, paths in by_kernel.items():
        if "numba" in paths and "python" in paths:
            print(f"{kernel}: numba speedup {paths['python'] / paths['numba']:.1f}x")


if __name__ == "__main__":
    main()
