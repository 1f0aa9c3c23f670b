"""CSV and SVG outputs for benchmark runs.

The CSV round-trips exactly (floats written with repr) so aggregates can be
recomputed from the file. The SVG is a static overhead view: occupancy in
black, obstacle spawn points with velocity vectors, one polyline per run
colored by planner with constant per-run opacity (overlapping runs shade
frequently used corridors darker), and collision points as red circles.
"""
from __future__ import annotations

import csv

import numpy as np

from ..worldsim.grid import OccupancyGrid
from .runner import RunResult

CSV_COLUMNS = (
    "planner", "scenario", "run", "time_s", "path_m",
    "collisions", "success", "timeout", "replans",
)

_PALETTE = ("#1f6fb2", "#d1495b", "#3f8f4a", "#8757a8", "#c77f2e", "#4aa6a6")


def export_csv(records, path) -> None:
    """Write one row per run in (planner, scenario, run) order."""
    rows = sorted(records, key=RunResult.key)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([
                r.planner, r.scenario, r.run, repr(r.time_s), repr(r.path_m),
                r.collisions, int(r.success), int(r.timeout), r.replans,
            ])


def load_csv(path) -> list[RunResult]:
    """Read records back; trajectories and failure diagnostics are not stored.

    ``reached_goal`` is reconstructed as success or a non-timeout run with
    two or more collisions; runs ended by a planner failure cannot be told
    apart from the latter once serialized.
    """
    out = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}: {reader.fieldnames}")
        for row in reader:
            success = bool(int(row["success"]))
            timeout = bool(int(row["timeout"]))
            collisions = int(row["collisions"])
            reached = success or (not timeout and collisions >= 2)
            out.append(RunResult(
                planner=row["planner"],
                scenario=row["scenario"],
                run=int(row["run"]),
                time_s=float(row["time_s"]),
                path_m=float(row["path_m"]),
                collisions=collisions,
                reached_goal=reached,
                success=success,
                timeout=timeout,
                replans=int(row["replans"]),
            ))
    return out


def _occupancy_rects(grid: OccupancyGrid, scale: float, height: float) -> list[str]:
    # merge horizontal runs of occupied cells into single rects
    rects = []
    res = grid.resolution
    for r in range(grid.cells.shape[0]):
        row = grid.cells[r]
        c = 0
        while c < row.size:
            if row[c]:
                c0 = c
                while c < row.size and row[c]:
                    c += 1
                x = c0 * res * scale
                y = (height - (r + 1) * res) * scale
                w = (c - c0) * res * scale
                h = res * scale
                rects.append(
                    f'<rect x="{x:.1f}" y="{y:.1f}" width="{w:.1f}" '
                    f'height="{h:.1f}" fill="#222"/>')
            else:
                c += 1
    return rects


def export_svg(
    grid: OccupancyGrid,
    trajectories,
    path,
    obstacles=None,
    collision_points=None,
    scale: float = 60.0,
) -> None:
    """Render trajectories over the map.

    ``trajectories`` maps planner name -> iterable of (n, >=2) pose arrays.
    World coordinates map to the image as X = x*scale, Y = (H - y)*scale
    (SVG y grows downward). ``obstacles`` is an iterable of obstacle states
    drawn as grey discs with a velocity vector (3 s of travel);
    ``collision_points`` is an iterable of (x, y) drawn as red circles.
    """
    H = grid.world_height
    W = grid.world_width

    def pt(x: float, y: float) -> str:
        return f"{x * scale:.1f},{(H - y) * scale:.1f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W * scale:.0f}" '
        f'height="{H * scale:.0f}" viewBox="0 0 {W * scale:.0f} {H * scale:.0f}">',
        f'<rect width="{W * scale:.0f}" height="{H * scale:.0f}" fill="#fafafa"/>',
    ]
    parts.extend(_occupancy_rects(grid, scale, H))

    for ob in obstacles or []:
        cx, cy = pt(ob.x, ob.y).split(",")
        parts.append(
            f'<circle cx="{cx}" cy="{cy}" r="{ob.radius * scale:.1f}" '
            f'fill="#999" fill-opacity="0.6"/>')
        speed = (ob.vx ** 2 + ob.vy ** 2) ** 0.5
        if speed > 0.0:
            parts.append(
                f'<line x1="{cx}" y1="{cy}" '
                f'x2="{(ob.x + 3.0 * ob.vx) * scale:.1f}" '
                f'y2="{(H - (ob.y + 3.0 * ob.vy)) * scale:.1f}" '
                f'stroke="#666" stroke-width="2"/>')

    for i, (name, runs) in enumerate(trajectories.items()):
        runs = [np.asarray(t) for t in runs]
        color = _PALETTE[i % len(_PALETTE)]
        opacity = max(0.05, min(0.85, 3.0 / max(1, len(runs))))
        parts.append(f'<g stroke="{color}" stroke-opacity="{opacity:.3f}" '
                     f'fill="none" stroke-width="2" data-planner="{name}">')
        for t in runs:
            pts = " ".join(pt(float(x), float(y)) for x, y in t[:, :2])
            parts.append(f'<polyline points="{pts}"/>')
        parts.append("</g>")

    for x, y in collision_points or []:
        cx, cy = pt(x, y).split(",")
        parts.append(f'<circle cx="{cx}" cy="{cy}" r="{0.08 * scale:.1f}" fill="#d11"/>')

    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts))


def _segment_counts(runs, resolution: float):
    """Count directed cell-to-cell hops across all runs.

    Poses are quantized to grid cells; consecutive distinct cells form a
    segment keyed by its (from, to) cell pair, so the count says how many
    times any run traversed that stretch of the map.
    """
    counts: dict[tuple, int] = {}
    for t in runs:
        t = np.asarray(t)
        cells = np.floor(t[:, :2] / resolution).astype(int)
        prev = None
        for cell in map(tuple, cells):
            if prev is not None and cell != prev:
                counts[(prev, cell)] = counts.get((prev, cell), 0) + 1
            prev = cell
    return counts


def export_frequency_svg(grid: OccupancyGrid, trajectories, path,
                         scale: float = 60.0) -> None:
    """Render trajectories with per-segment opacity proportional to use.

    Unlike :func:`export_svg`, which draws every run at one opacity, this
    collapses the runs of each planner into unique map segments and darkens
    each in proportion to how often it was traversed — a corridor used by
    every run is opaque, a one-off detour is faint.
    """
    H = grid.world_height
    W = grid.world_width
    res = grid.resolution

    def pt(x: float, y: float) -> str:
        return f"{x * scale:.1f},{(H - y) * scale:.1f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W * scale:.0f}" '
        f'height="{H * scale:.0f}" viewBox="0 0 {W * scale:.0f} {H * scale:.0f}">',
        f'<rect width="{W * scale:.0f}" height="{H * scale:.0f}" fill="#fafafa"/>',
    ]
    parts.extend(_occupancy_rects(grid, scale, H))

    for i, (name, runs) in enumerate(trajectories.items()):
        color = _PALETTE[i % len(_PALETTE)]
        counts = _segment_counts(runs, res)
        if not counts:
            continue
        peak = max(counts.values())
        parts.append(f'<g stroke="{color}" fill="none" stroke-width="3" '
                     f'stroke-linecap="round" data-planner="{name}">')
        # segments drawn at cell centers, keyed order for determinism
        for (a, b), n in sorted(counts.items()):
            opacity = max(0.08, n / peak)
            x1, y1 = pt((a[0] + 0.5) * res, (a[1] + 0.5) * res).split(",")
            x2, y2 = pt((b[0] + 0.5) * res, (b[1] + 0.5) * res).split(",")
            parts.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                         f'stroke-opacity="{opacity:.3f}" data-count="{n}"/>')
        parts.append("</g>")

    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts))
