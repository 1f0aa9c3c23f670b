"""Numpy fallback for the hot kernels.

Mirrors ``_core.pyx`` operation by operation: the DDA traversal uses the
same crossing formulas and the same tie rule (equal boundary distances step
the y axis), so compiled and pure backends agree to float rounding.
"""
from __future__ import annotations

import numpy as np


def raycast_ranges(occ, resolution, ox, oy, angles, range_max, circles=None):
    """Exact grid raycast (Amanatides-Woo) plus analytic circle hits.

    occ: (H, W) uint8/bool occupancy, row-major, cell (r, c) spanning
    [c*res, (c+1)*res) x [r*res, (r+1)*res). angles are world-frame beam
    angles. circles is an (M, 3) array of (cx, cy, radius) or None.
    Returns per-beam range in meters, capped at range_max; leaving the grid
    counts as no hit.
    """
    occ = np.asarray(occ)
    angles = np.asarray(angles, dtype=float)
    h, w = occ.shape
    res = float(resolution)
    n = angles.shape[0]

    dx = np.cos(angles)
    dy = np.sin(angles)
    ix0 = int(np.floor(ox / res))
    iy0 = int(np.floor(oy / res))

    ranges = np.full(n, float(range_max))
    if 0 <= ix0 < w and 0 <= iy0 < h and occ[iy0, ix0]:
        return np.zeros(n)

    ix = np.full(n, ix0, dtype=np.int64)
    iy = np.full(n, iy0, dtype=np.int64)
    stepx = np.sign(dx).astype(np.int64)
    stepy = np.sign(dy).astype(np.int64)

    with np.errstate(divide="ignore", invalid="ignore"):
        tdx = np.where(dx != 0.0, res / np.abs(dx), np.inf)
        tdy = np.where(dy != 0.0, res / np.abs(dy), np.inf)
        tmx = np.where(
            dx > 0.0, ((ix0 + 1) * res - ox) / dx,
            np.where(dx < 0.0, (ix0 * res - ox) / dx, np.inf),
        )
        tmy = np.where(
            dy > 0.0, ((iy0 + 1) * res - oy) / dy,
            np.where(dy < 0.0, (iy0 * res - oy) / dy, np.inf),
        )

    done = np.zeros(n, dtype=bool)
    while not done.all():
        go_x = tmx < tmy  # tie steps y, matching the scalar kernel
        t = np.where(go_x, tmx, tmy)
        adv_x = ~done & go_x
        adv_y = ~done & ~go_x
        ix = np.where(adv_x, ix + stepx, ix)
        iy = np.where(adv_y, iy + stepy, iy)
        tmx = np.where(adv_x, tmx + tdx, tmx)
        tmy = np.where(adv_y, tmy + tdy, tmy)

        capped = ~done & (t >= range_max)
        done |= capped

        inside = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
        left = ~done & ~inside
        done |= left

        probe = ~done & inside
        if probe.any():
            hit = np.zeros(n, dtype=bool)
            hit[probe] = occ[iy[probe], ix[probe]] != 0
            ranges = np.where(hit, t, ranges)
            done |= hit

    if circles is not None and len(circles):
        circles = np.asarray(circles, dtype=float)
        relx = circles[:, 0] - ox
        rely = circles[:, 1] - oy
        c2 = relx * relx + rely * rely - circles[:, 2] * circles[:, 2]
        b = dx[:, None] * relx[None, :] + dy[:, None] * rely[None, :]
        disc = b * b - c2[None, :]
        ok = disc >= 0.0
        tq = np.where(ok, b - np.sqrt(np.where(ok, disc, 0.0)), np.inf)
        tq = np.where(ok & (tq > 0.0), tq, np.inf)
        tq = np.where(np.broadcast_to(c2 < 0.0, tq.shape), 0.0, tq)
        ranges = np.minimum(ranges, tq.min(axis=1))

    return np.minimum(np.maximum(ranges, 0.0), range_max)


def min_clearances(xs, ys, px, py):
    """Per-trajectory minimum distance to a point set.

    xs, ys: (S, T) trajectory sample positions; px, py: (P,) obstacle
    points. Returns (S,) distances, inf when the point set is empty.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    if px.size == 0:
        return np.full(xs.shape[0], np.inf)
    d2 = (xs[:, :, None] - px) ** 2 + (ys[:, :, None] - py) ** 2
    return np.sqrt(d2.min(axis=(1, 2)))


def disc_hits_grid(occ, resolution, x, y, radius):
    """True iff a disc overlaps any occupied cell (strict overlap).

    Cells are axis-aligned boxes; the test clamps the disc center to each
    occupied box in the disc's bounding window. Space outside the grid
    counts as free.
    """
    occ = np.asarray(occ)
    h, w = occ.shape
    res = float(resolution)
    c0 = max(int(np.floor((x - radius) / res)), 0)
    c1 = min(int(np.floor((x + radius) / res)), w - 1)
    r0 = max(int(np.floor((y - radius) / res)), 0)
    r1 = min(int(np.floor((y + radius) / res)), h - 1)
    if c0 > c1 or r0 > r1:
        return False
    sub = occ[r0 : r1 + 1, c0 : c1 + 1]
    rows, cols = np.nonzero(sub)
    if rows.size == 0:
        return False
    cols = cols + c0
    rows = rows + r0
    nx = np.clip(x, cols * res, (cols + 1) * res)
    ny = np.clip(y, rows * res, (rows + 1) * res)
    d2 = (nx - x) ** 2 + (ny - y) ** 2
    return bool((d2 < radius * radius).any())
