#!/usr/bin/env python3
"""Time the compiled kernels against the numpy fallback.

Loads both implementations side by side (ignoring the package-level backend
switch), checks they agree on the benchmark inputs, then reports per-call
times and the speedup. A full-world step benchmark at the bottom shows what
the difference means for simulation throughput.

Run:  python3 benchmarks/bench_kernels.py [--repeats N]
"""
from __future__ import annotations

import argparse
import importlib
import time

import numpy as np

from nav_arena.kernels import _impl_py
from nav_arena.worldsim import (
    MapGenParams,
    RobotState,
    World,
    WorldConfig,
    generate_random_map,
)
from nav_arena.worldsim.obstacles import spawn_obstacles

try:
    _core = importlib.import_module("nav_arena.kernels._core")
except ImportError:
    _core = None


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raycast(impl, grid, circles, repeats):
    angles = np.linspace(-np.pi, np.pi, 360, endpoint=False)
    return _time(lambda: impl.raycast_ranges(
        grid.cells, grid.resolution, 5.0, 5.0, angles, 3.5, circles), repeats)


def bench_clearance(impl, repeats):
    rng = np.random.default_rng(3)
    xs = rng.uniform(0, 10, size=(40, 30))
    ys = rng.uniform(0, 10, size=(40, 30))
    px = rng.uniform(0, 10, size=25)
    py = rng.uniform(0, 10, size=25)
    return _time(lambda: impl.min_clearances(xs, ys, px, py), repeats)


def bench_disc(impl, grid, repeats):
    def run():
        for x in np.linspace(0.5, 9.5, 40):
            impl.disc_hits_grid(grid.cells, grid.resolution, x, 5.0, 0.3)
    return _time(run, repeats)


def bench_world_step(repeats):
    """End-to-end world throughput under whichever backend is active."""
    grid = generate_random_map(1, MapGenParams(n_walls=2, n_static=3))
    obstacles = spawn_obstacles(grid, 10, 0.2, seed=1)
    world = World(WorldConfig(), grid, RobotState(5.0, 5.0, 0.0), obstacles)

    def run():
        for _ in range(200):
            world.step(0.3, 0.5)
            world.raycast()
    return 200.0 / _time(run, repeats)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    grid = generate_random_map(7, MapGenParams(n_walls=3, n_static=4))
    circles = np.array([[3.0, 4.0, 0.3], [6.5, 5.5, 0.3], [5.0, 8.0, 0.25]])

    if _core is not None:
        angles = np.linspace(-np.pi, np.pi, 360, endpoint=False)
        a = _core.raycast_ranges(grid.cells, grid.resolution, 5.0, 5.0,
                                 angles, 3.5, circles)
        b = _impl_py.raycast_ranges(grid.cells, grid.resolution, 5.0, 5.0,
                                    angles, 3.5, circles)
        np.testing.assert_allclose(a, b, atol=1e-9)
        print("backends agree on 360-beam raycast (atol 1e-9)\n")

    rows = [
        ("raycast 360 beams", bench_raycast, (grid, circles)),
        ("dwa clearance 40x30x25", bench_clearance, ()),
        ("disc-grid overlap x40", bench_disc, (grid,)),
    ]
    print(f"{'kernel':<26} {'python':>12} {'compiled':>12} {'speedup':>9}")
    print("-" * 62)
    for name, fn, extra in rows:
        t_py = fn(_impl_py, *extra, args.repeats)
        if _core is None:
            print(f"{name:<26} {t_py * 1e6:>10.1f}us {'n/a':>12} {'':>9}")
            continue
        t_c = fn(_core, *extra, args.repeats)
        print(f"{name:<26} {t_py * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us "
              f"{t_py / t_c:>8.1f}x")

    sps = bench_world_step(args.repeats)
    from nav_arena.kernels import BACKEND
    print(f"\nworld step+scan throughput ({BACKEND} backend): {sps:,.0f} steps/s")
    if _core is None:
        print("compiled extension not built; run pip install -e . to build it")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
