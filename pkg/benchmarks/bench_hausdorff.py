#!/usr/bin/env python3
"""Timing comparison of the distance-kernel backends.

Runs the directed max-min reduction on gasket-style clouds with the compiled
extension (when built), the numpy fallback, and the KD-tree index, checking
along the way that all three produce the same value.

Usage: PYTHONPATH=src python3 benchmarks/bench_hausdorff.py
"""

import time

import numpy as np

import kfractal._kernels as kernels
from kfractal import fixtures
from kfractal.attractor import SetTuple, compute_attractor, directed_distance


def gasket_cloud(pitch):
    sys_ = fixtures.sierpinski()
    K, _ = compute_attractor(sys_, (1,), SetTuple.from_fibers(sys_, pitch), tol=pitch / 4)
    return K.points("v")


def timed(fn, *args, repeat=3):
    best = float("inf")
    value = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return value, best


def main():
    print(f"selected backend: {kernels.BACKEND}")
    rng = np.random.default_rng(0)
    rows = []
    for pitch in (1 / 64, 1 / 128, 1 / 256, 1 / 512):
        cloud = gasket_cloud(pitch)
        probe = rng.random((len(cloud) // 2, 2))
        label = f"{len(probe)}x{len(cloud)}"

        v_direct, t_direct = timed(
            lambda: kernels.directed_max_min(probe, cloud, "euclidean")
        )
        v_fall, t_fall = timed(
            lambda: kernels.directed_max_min(probe, cloud, "euclidean", force_fallback=True)
        )
        v_index, t_index = timed(
            lambda: directed_distance(probe, cloud, "euclidean", method="indexed")
        )
        assert v_direct == v_fall, "backends disagree"
        assert abs(v_direct - v_index) < 1e-12, "index disagrees"
        rows.append((label, t_direct, t_fall, t_index))

    print(f"{'pairs':>16} {'direct(' + kernels.BACKEND + ')':>18} {'fallback':>12} {'kd-index':>12}")
    for label, td, tf, ti in rows:
        print(f"{label:>16} {td:>16.4f}s {tf:>11.4f}s {ti:>11.4f}s")


if __name__ == "__main__":
    main()
