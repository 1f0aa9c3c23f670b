"""Shared test oracles.

These deliberately avoid the library's own machinery: the raycast oracle
marches sample points instead of traversing cells, and the flood fill is a
plain BFS rather than scipy labeling, so each checks the implementation
from the outside.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np


def marching_raycast(cells, resolution, ox, oy, angle, range_max,
                     circles=(), step=0.001):
    """Brute-force raycast: walk the beam in 1 mm steps and report the first
    sample inside an occupied cell or an obstacle disc (range_max if none).
    """
    cells = np.asarray(cells)
    h, w = cells.shape
    n = int(round(range_max / step))
    t = np.arange(1, n + 1) * step
    xs = ox + np.cos(angle) * t
    ys = oy + np.sin(angle) * t
    c = np.floor(xs / resolution).astype(int)
    r = np.floor(ys / resolution).astype(int)
    inside = (c >= 0) & (c < w) & (r >= 0) & (r < h)
    hit = np.zeros(t.shape, dtype=bool)
    hit[inside] = cells[r[inside], c[inside]] != 0
    for cx, cy, rad in circles:
        hit |= (xs - cx) ** 2 + (ys - cy) ** 2 <= rad * rad
    if not hit.any():
        return float(range_max)
    return float(t[int(np.argmax(hit))])


def bfs_free_cells(cells, start):
    """4-connected BFS over free cells from a (row, col) start."""
    cells = np.asarray(cells)
    h, w = cells.shape
    seen = np.zeros_like(cells, dtype=bool)
    seen[start] = True
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        for rr, cc in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
            if 0 <= rr < h and 0 <= cc < w and not seen[rr, cc] and cells[rr, cc] == 0:
                seen[rr, cc] = True
                queue.append((rr, cc))
    return seen


def dense_subgoal_oracle(path, p_r, d_ahead, spacing=0.001):
    """Max-arclength point among 1 mm path samples inside the horizon circle.

    Returns (arclength, x, y) or None when no sample lies within d_ahead of
    p_r — the discrete stand-in for the exact circle-intersection branch.
    """
    total = path.total_length
    n = max(int(math.ceil(total / spacing)), 1)
    s = np.linspace(0.0, total, n + 1)
    xs = np.interp(s, path.cumulative_arclength, path.poses[:, 0])
    ys = np.interp(s, path.cumulative_arclength, path.poses[:, 1])
    inside = (xs - p_r[0]) ** 2 + (ys - p_r[1]) ** 2 <= d_ahead * d_ahead
    if not inside.any():
        return None
    i = int(np.nonzero(inside)[0][-1])
    return float(s[i]), float(xs[i]), float(ys[i])


def random_polyline_path(rng, span=0.35, n_lo=6, n_hi=40):
    """Random jagged polyline shaped like a planner output (for oracles)."""
    from nav_arena.global_planner import GlobalPath

    n = int(rng.integers(n_lo, n_hi))
    steps = rng.uniform(-span, span, size=(n, 2))
    poses = np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])
    poses += rng.uniform(-1.0, 1.0, size=2)
    return GlobalPath.from_poses(poses)


def random_free_pose(grid, rng, clearance=0.0):
    """Uniform random point on free cells (rejection sampling)."""
    for _ in range(10_000):
        x = rng.uniform(0.0, grid.world_width)
        y = rng.uniform(0.0, grid.world_height)
        if clearance > 0.0:
            from nav_arena.kernels import disc_hits_grid

            if not disc_hits_grid(grid.cells, grid.resolution, x, y, clearance):
                return x, y
        elif not grid.is_occupied(x, y):
            return x, y
    raise RuntimeError("no free pose found")
