"""Occupancy grids: storage, text map I/O, and random map generation.

Grid convention: ``cells[r, c]`` is True when occupied and covers the world
box [c*res, (c+1)*res) x [r*res, (r+1)*res), so row 0 sits at y=0 (y grows
upward). Map files store one character per cell ('#' occupied, '.' free)
with the TOP row first, so the file reads like a map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage


class MapGenError(Exception):
    """Random map generation could not satisfy the constraints."""


@dataclass
class OccupancyGrid:
    width: int
    height: int
    resolution: float
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        self.cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if self.cells.shape != (self.height, self.width):
            raise ValueError(
                f"cells shape {self.cells.shape} != (height, width) "
                f"({self.height}, {self.width})"
            )

    @classmethod
    def empty(cls, width: int, height: int, resolution: float, border: bool = True):
        cells = np.zeros((height, width), dtype=np.uint8)
        if border:
            cells[0, :] = cells[-1, :] = 1
            cells[:, 0] = cells[:, -1] = 1
        return cls(width, height, resolution, cells)

    @property
    def world_width(self) -> float:
        return self.width * self.resolution

    @property
    def world_height(self) -> float:
        return self.height * self.resolution

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """(row, col) of the cell containing a world point."""
        return int(math.floor(y / self.resolution)), int(math.floor(x / self.resolution))

    def in_bounds(self, r: int, c: int) -> bool:
        return 0 <= r < self.height and 0 <= c < self.width

    def is_occupied(self, x: float, y: float) -> bool:
        """Occupancy of the cell containing (x, y); out-of-grid counts occupied."""
        r, c = self.cell_of(x, y)
        if not self.in_bounds(r, c):
            return True
        return bool(self.cells[r, c])

    def cell_center(self, r: int, c: int) -> tuple[float, float]:
        return (c + 0.5) * self.resolution, (r + 0.5) * self.resolution

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.width, self.height, self.resolution, self.cells.copy())

    # ------------------------------------------------------------------
    # Text map format
    # ------------------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"{self.width} {self.height} {self.resolution!r}"]
        for r in range(self.height - 1, -1, -1):
            lines.append("".join("#" if v else "." for v in self.cells[r]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "OccupancyGrid":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty map file")
        head = lines[0].split()
        if len(head) != 3:
            raise ValueError(f"bad map header {lines[0]!r}; want 'width height resolution'")
        width, height = int(head[0]), int(head[1])
        resolution = float(head[2])
        rows = lines[1:]
        if len(rows) != height:
            raise ValueError(f"map body has {len(rows)} rows, header says {height}")
        cells = np.zeros((height, width), dtype=np.uint8)
        for i, row in enumerate(rows):
            if len(row) != width:
                raise ValueError(f"map row {i} has {len(row)} cells, header says {width}")
            bad = set(row) - {"#", "."}
            if bad:
                raise ValueError(f"map row {i} has unknown cells {sorted(bad)}")
            cells[height - 1 - i] = [1 if ch == "#" else 0 for ch in row]
        return cls(width, height, resolution, cells)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "OccupancyGrid":
        return cls.from_text(Path(path).read_text())


@dataclass
class MapGenParams:
    width: int = 100
    height: int = 100
    resolution: float = 0.1
    n_walls: int = 0
    n_static: int = 0
    wall_len_range: tuple[int, int] = (10, 40)
    static_size_range: tuple[int, int] = (2, 8)
    max_attempts: int = 100


def _place_rect(cells: np.ndarray, rng: np.random.Generator, h: int, w: int) -> bool:
    """Place an h x w occupied block on free interior cells; False if crowded."""
    rows, cols = cells.shape
    if h > rows - 2 or w > cols - 2:
        return False
    for _ in range(50):
        r = int(rng.integers(1, rows - h))
        c = int(rng.integers(1, cols - w))
        if not cells[r : r + h, c : c + w].any():
            cells[r : r + h, c : c + w] = 1
            return True
    return False


def _largest_free_region(cells: np.ndarray) -> tuple[np.ndarray, int, int]:
    """4-connected labeling of free space: (mask of largest region, its size, total free)."""
    free = cells == 0
    labels, n = ndimage.label(free)
    total = int(free.sum())
    if n == 0:
        return np.zeros_like(free), 0, total
    sizes = ndimage.sum_labels(free, labels, index=np.arange(1, n + 1))
    best = int(np.argmax(sizes)) + 1
    return labels == best, int(sizes[best - 1]), total


def generate_random_map(seed: int, params: MapGenParams | None = None) -> OccupancyGrid:
    """Bounded random map with wall segments and rectangular static blocks.

    Free pockets disconnected from the largest free region are filled in, so
    all remaining free cells are mutually reachable. Regenerates (up to
    ``max_attempts``) whenever the largest region covers < 50% of free cells
    or an obstacle cannot be placed.
    """
    params = params or MapGenParams()
    if params.width < 3 or params.height < 3:
        raise MapGenError(f"map {params.width}x{params.height} too small to bound")
    rng = np.random.default_rng(seed)
    for _ in range(params.max_attempts):
        cells = np.zeros((params.height, params.width), dtype=np.uint8)
        cells[0, :] = cells[-1, :] = 1
        cells[:, 0] = cells[:, -1] = 1

        ok = True
        for _ in range(params.n_walls):
            length = int(rng.integers(params.wall_len_range[0], params.wall_len_range[1] + 1))
            if rng.integers(0, 2) == 0:  # horizontal run, one cell thick
                ok &= _place_rect(cells, rng, 1, min(length, params.width - 2))
            else:
                ok &= _place_rect(cells, rng, min(length, params.height - 2), 1)
        lo, hi = params.static_size_range
        for _ in range(params.n_static):
            bh = int(rng.integers(lo, hi + 1))
            bw = int(rng.integers(lo, hi + 1))
            ok &= _place_rect(cells, rng, bh, bw)
        if not ok:
            continue

        region, size, total_free = _largest_free_region(cells)
        if total_free == 0 or size * 2 < total_free:
            continue
        cells[~region] = 1  # seal unreachable pockets
        return OccupancyGrid(params.width, params.height, params.resolution, cells)
    raise MapGenError(
        f"no feasible map after {params.max_attempts} attempts "
        f"(size {params.width}x{params.height}, walls {params.n_walls}, "
        f"static {params.n_static})"
    )
