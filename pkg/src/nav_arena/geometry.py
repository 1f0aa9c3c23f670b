"""Small planar-geometry helpers shared across planners.

Conventions: points are (x, y) in meters, angles in radians wrapped to
(-pi, pi], polylines are (N, 2) float arrays.
"""
from __future__ import annotations

import math

import numpy as np


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def point_segment_distance(p, a, b) -> float:
    """Distance from point p to the segment a-b."""
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg2
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_polyline_distance(p, poses: np.ndarray) -> float:
    """Minimum distance from point p to a polyline of (N, 2) vertices."""
    poses = np.asarray(poses, dtype=float)
    if len(poses) == 1:
        return float(math.hypot(p[0] - poses[0, 0], p[1] - poses[0, 1]))
    a = poses[:-1]
    d = poses[1:] - a
    seg2 = np.einsum("ij,ij->i", d, d)
    rel = np.asarray(p, dtype=float) - a
    t = np.divide(
        np.einsum("ij,ij->i", rel, d), seg2,
        out=np.zeros_like(seg2), where=seg2 > 0.0,
    )
    np.clip(t, 0.0, 1.0, out=t)
    closest = a + t[:, None] * d
    diff = closest - np.asarray(p, dtype=float)
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", diff, diff))))


def circle_polyline_intersections(
    poses: np.ndarray,
    cumulative: np.ndarray,
    center,
    radius: float,
) -> np.ndarray:
    """Arclengths of every intersection between a circle and a polyline.

    Solved analytically per segment (quadratic in the segment parameter);
    duplicate hits at shared segment endpoints are merged. Returns a sorted
    array of arclengths, possibly empty.
    """
    poses = np.asarray(poses, dtype=float)
    if len(poses) < 2:
        return np.empty(0)
    a = poses[:-1]
    d = poses[1:] - a
    rel = a - np.asarray(center, dtype=float)
    # |rel + t d|^2 = radius^2  ->  qa t^2 + qb t + qc = 0
    qa = np.einsum("ij,ij->i", d, d)
    qb = 2.0 * np.einsum("ij,ij->i", rel, d)
    qc = np.einsum("ij,ij->i", rel, rel) - radius * radius
    disc = qb * qb - 4.0 * qa * qc
    hits: list[float] = []
    seg_len = np.sqrt(qa)
    valid = (qa > 0.0) & (disc >= 0.0)
    for i in np.nonzero(valid)[0]:
        root = math.sqrt(disc[i])
        for t in ((-qb[i] - root) / (2.0 * qa[i]), (-qb[i] + root) / (2.0 * qa[i])):
            if 0.0 <= t <= 1.0:
                hits.append(float(cumulative[i] + t * seg_len[i]))
    if not hits:
        return np.empty(0)
    hits.sort()
    merged = [hits[0]]
    for s in hits[1:]:
        if s - merged[-1] > 1e-9:
            merged.append(s)
    return np.asarray(merged)
