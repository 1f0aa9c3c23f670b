"""Global path planning: A* over an inflated occupancy grid.

The search graph is the 8-connected cell lattice with straight cost
1*resolution and diagonal cost sqrt(2)*resolution, an octile heuristic,
and deterministic (f, h, cell-index) tie-breaking. Nodes may be reopened
when a cheaper route appears, so float-level heuristic inconsistency can
never cost optimality: the returned cost equals Dijkstra's exactly.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .worldsim.grid import OccupancyGrid


class NoPath(Exception):
    """Goal unreachable from start on the inflated grid."""


class InvalidEndpoint(Exception):
    """Start or goal maps to an occupied (or out-of-grid) inflated cell."""


@dataclass
class GlobalPath:
    """Piecewise-linear path with precomputed arclength.

    poses is an (N, 2) float array; cumulative_arclength[i] is the arclength
    from the start to poses[i], so it runs 0 .. total_length.
    """
    poses: np.ndarray = field(repr=False)
    cumulative_arclength: np.ndarray = field(repr=False)
    total_length: float = 0.0

    @classmethod
    def from_poses(cls, poses) -> "GlobalPath":
        poses = np.atleast_2d(np.asarray(poses, dtype=float))
        if len(poses) == 1:
            cum = np.zeros(1)
        else:
            d = np.linalg.norm(np.diff(poses, axis=0), axis=1)
            cum = np.concatenate([[0.0], np.cumsum(d)])
        return cls(poses, cum, float(cum[-1]))


@dataclass
class PlannerGrid:
    base: OccupancyGrid
    inflation_radius: float
    inflated: np.ndarray = field(repr=False)

    @property
    def resolution(self) -> float:
        return self.base.resolution

    def is_free_cell(self, r: int, c: int) -> bool:
        return self.base.in_bounds(r, c) and not self.inflated[r, c]


def inflate(grid: OccupancyGrid, radius: float) -> PlannerGrid:
    """Dilate occupancy by a disc: a cell is inflated-occupied iff its
    center lies within ``radius`` of some base-occupied cell's center."""
    if radius < 0.0:
        raise ValueError("inflation radius must be >= 0")
    res = grid.resolution
    k = int(math.floor(radius / res))
    if k == 0:
        inflated = grid.cells != 0
    else:
        dr, dc = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1), indexing="ij")
        disc = (dr * dr + dc * dc).astype(float) * (res * res) <= radius * radius
        inflated = ndimage.binary_dilation(grid.cells != 0, structure=disc)
    return PlannerGrid(grid, radius, np.ascontiguousarray(inflated))


_SQRT2 = math.sqrt(2.0)
# neighbor order fixed for reproducibility: E, W, N, S, then diagonals
_NEIGHBORS = (
    (0, 1, 0), (0, -1, 0), (1, 0, 0), (-1, 0, 0),
    (1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1),
)


def cost_key(straight: int, diagonal: int, res: float) -> float:
    """Canonical float cost of a step-count pair.

    Costs are tracked as integer (straight, diagonal) counts and turned into
    floats only through this one expression, so equal-cost paths produce the
    same float and A* matches a Dijkstra oracle bit for bit. Distinct pairs
    are separated by >= ~resolution/250 (continued-fraction bound on
    a + b*sqrt(2)), far above float rounding, so comparisons never mis-order.
    """
    return straight * res + diagonal * (res * _SQRT2)


def _octile(r: int, c: int, gr: int, gc: int, res: float) -> float:
    dr, dc = abs(gr - r), abs(gc - c)
    lo, hi = (dr, dc) if dr < dc else (dc, dr)
    return cost_key(hi - lo, lo, res)


def plan_astar(pgrid: PlannerGrid, start, goal) -> GlobalPath:
    """8-connected A* from start to goal (world coordinates, meters).

    Poses are the visited cell centers with the exact start/goal coordinates
    attached at the ends (so consecutive poses stay within sqrt(2)*resolution).
    Raises InvalidEndpoint for occupied endpoints, NoPath when unreachable.
    """
    base = pgrid.base
    res = base.resolution
    sr, sc = base.cell_of(start[0], start[1])
    gr, gc = base.cell_of(goal[0], goal[1])
    for name, (r, c) in (("start", (sr, sc)), ("goal", (gr, gc))):
        if not pgrid.is_free_cell(r, c):
            raise InvalidEndpoint(f"{name} cell ({r}, {c}) is occupied or outside the grid")

    if (sr, sc) == (gr, gc):
        if start[0] == goal[0] and start[1] == goal[1]:
            return GlobalPath.from_poses([start])
        return GlobalPath.from_poses([start, goal])

    w = base.width
    occ = pgrid.inflated
    h, _ = occ.shape
    # g tracked as (key, straights, diagonals); key = cost_key(straights, diagonals)
    g_best: dict[int, tuple[float, int, int]] = {}
    parent: dict[int, int] = {}
    s_idx = sr * w + sc
    g_idx = gr * w + gc
    g_best[s_idx] = (0.0, 0, 0)
    h0 = _octile(sr, sc, gr, gc, res)
    heap = [(h0, h0, s_idx, 0, 0)]
    while heap:
        f, _, idx, a, b = heapq.heappop(heap)
        if (a, b) != g_best[idx][1:]:
            continue  # stale entry (node was reopened with a cheaper route)
        if idx == g_idx:
            break
        g = g_best[idx][0]
        r, c = divmod(idx, w)
        for dr, dc, diag in _NEIGHBORS:
            rr, cc = r + dr, c + dc
            if rr < 0 or rr >= h or cc < 0 or cc >= w or occ[rr, cc]:
                continue
            nidx = rr * w + cc
            na, nb = a + 1 - diag, b + diag
            ng = cost_key(na, nb, res)
            if ng < g_best.get(nidx, (math.inf,))[0]:
                g_best[nidx] = (ng, na, nb)
                parent[nidx] = idx
                nh = _octile(rr, cc, gr, gc, res)
                heapq.heappush(heap, (ng + nh, nh, nidx, na, nb))
    else:
        raise NoPath(f"no route from cell ({sr}, {sc}) to ({gr}, {gc})")

    cells = []
    idx = g_idx
    while idx != s_idx:
        cells.append(idx)
        idx = parent[idx]
    cells.append(s_idx)
    cells.reverse()
    poses = [base.cell_center(*divmod(i, w)) for i in cells]
    if tuple(start) != poses[0]:
        poses.insert(0, (float(start[0]), float(start[1])))
    if tuple(goal) != poses[-1]:
        poses.append((float(goal[0]), float(goal[1])))
    return GlobalPath.from_poses(poses)


def path_query(path: GlobalPath, s: float):
    """Point at arclength s along the path (linear interpolation)."""
    if s < 0.0 or s > path.total_length:
        raise ValueError(f"arclength {s} outside [0, {path.total_length}]")
    cum = path.cumulative_arclength
    i = int(np.searchsorted(cum, s, side="right")) - 1
    if i >= len(cum) - 1:
        return float(path.poses[-1, 0]), float(path.poses[-1, 1])
    seg = cum[i + 1] - cum[i]
    t = 0.0 if seg <= 0.0 else (s - cum[i]) / seg
    p = path.poses[i] + t * (path.poses[i + 1] - path.poses[i])
    return float(p[0]), float(p[1])


class GlobalPlanner:
    """Convenience wrapper binding a map to its inflated planning grid."""

    def __init__(self, grid: OccupancyGrid, inflation_radius: float = 0.35):
        self.pgrid = inflate(grid, inflation_radius)

    def plan(self, start, goal) -> GlobalPath:
        return plan_astar(self.pgrid, start, goal)
