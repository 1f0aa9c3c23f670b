"""Dynamic disc obstacles and their motion models.

Models:
- ``linear-bounce``: straight-line motion, reflecting off occupied cells by
  negating the blocked velocity component (axis-separated move, so speed is
  preserved exactly).
- ``random-walk``: linear-bounce plus seeded random re-aims at random
  intervals.
- ``waypoint-loop``: constant-speed pursuit of a looped waypoint list.

Obstacles ignore the robot and each other; only the robot-obstacle overlap
is treated as a collision by the world.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..kernels import disc_hits_grid
from .grid import OccupancyGrid

MOTION_MODELS = ("linear-bounce", "random-walk", "waypoint-loop")


class SpawnError(Exception):
    """Free space could not host the requested obstacles."""


@dataclass
class ObstacleState:
    x: float
    y: float
    vx: float
    vy: float
    radius: float
    motion_model: str = "linear-bounce"
    # waypoint-loop state
    waypoints: list[tuple[float, float]] = field(default_factory=list)
    waypoint_index: int = 0
    blocked_steps: int = 0
    # random-walk state
    rng: np.random.Generator | None = field(default=None, repr=False)
    steps_to_turn: int = 0

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    def _aim(self, angle: float, speed: float) -> None:
        self.vx = speed * math.cos(angle)
        self.vy = speed * math.sin(angle)

    def _move_bounce(self, grid: OccupancyGrid, dt: float) -> None:
        # Axis-separated: a blocked axis negates its velocity component and
        # skips the move, which reflects off axis-aligned cell walls.
        nx = self.x + self.vx * dt
        if disc_hits_grid(grid.cells, grid.resolution, nx, self.y, self.radius):
            self.vx = -self.vx
        else:
            self.x = nx
        ny = self.y + self.vy * dt
        if disc_hits_grid(grid.cells, grid.resolution, self.x, ny, self.radius):
            self.vy = -self.vy
        else:
            self.y = ny

    def step(self, grid: OccupancyGrid, dt: float) -> None:
        if self.motion_model == "random-walk":
            self.steps_to_turn -= 1
            if self.steps_to_turn <= 0:
                self._aim(self.rng.uniform(-math.pi, math.pi), self.speed)
                self.steps_to_turn = int(self.rng.integers(10, 60))
            self._move_bounce(grid, dt)
        elif self.motion_model == "waypoint-loop":
            if self.waypoints:
                wx, wy = self.waypoints[self.waypoint_index]
                dist = math.hypot(wx - self.x, wy - self.y)
                if dist < 0.2 or self.blocked_steps > 20:
                    self.waypoint_index = (self.waypoint_index + 1) % len(self.waypoints)
                    self.blocked_steps = 0
                    wx, wy = self.waypoints[self.waypoint_index]
                    dist = math.hypot(wx - self.x, wy - self.y)
                if dist > 1e-9:
                    self._aim(math.atan2(wy - self.y, wx - self.x), self.speed)
            before = (self.x, self.y)
            self._move_bounce(grid, dt)
            if (self.x, self.y) == before:
                self.blocked_steps += 1
        else:
            self._move_bounce(grid, dt)


def spawn_obstacles(
    grid: OccupancyGrid,
    n: int,
    v_obs: float,
    model: str = "linear-bounce",
    seed: int = 0,
    radius: float = 0.3,
    direction: str = "random",
    keep_out: list[tuple[float, float, float]] | None = None,
) -> list[ObstacleState]:
    """Place n obstacles on free space, all moving at speed v_obs.

    ``direction`` applies to linear-bounce: "random" heading or
    "horizontal" (+-x, seeded sign). ``keep_out`` lists (x, y, radius)
    discs to avoid, e.g. around the robot start and the goal. Raises
    SpawnError after 1000 failed placement attempts for any obstacle.
    """
    if model not in MOTION_MODELS:
        raise ValueError(f"unknown motion model {model!r}; expected one of {MOTION_MODELS}")
    rng = np.random.default_rng(seed)
    keep_out = keep_out or []
    obstacles: list[ObstacleState] = []

    def free_at(x: float, y: float) -> bool:
        if disc_hits_grid(grid.cells, grid.resolution, x, y, radius):
            return False
        for ob in obstacles:
            if math.hypot(x - ob.x, y - ob.y) < radius + ob.radius:
                return False
        for kx, ky, kr in keep_out:
            if math.hypot(x - kx, y - ky) < radius + kr:
                return False
        return True

    def sample_free() -> tuple[float, float]:
        for _ in range(1000):
            x = rng.uniform(0.0, grid.world_width)
            y = rng.uniform(0.0, grid.world_height)
            if free_at(x, y):
                return x, y
        raise SpawnError(f"no free spot for obstacle {len(obstacles) + 1} of {n} after 1000 attempts")

    for _ in range(n):
        x, y = sample_free()
        ob = ObstacleState(x, y, 0.0, 0.0, radius, motion_model=model)
        if model == "linear-bounce" and direction == "horizontal":
            ob.vx = v_obs if rng.integers(0, 2) == 0 else -v_obs
            ob.vy = 0.0
        else:
            ob._aim(rng.uniform(-math.pi, math.pi), v_obs)
        if model == "random-walk":
            ob.rng = np.random.default_rng(rng.integers(0, 2**63))
            ob.steps_to_turn = int(ob.rng.integers(10, 60))
        elif model == "waypoint-loop":
            pts = [(x, y)]
            for _ in range(int(rng.integers(2, 5))):
                for _ in range(1000):
                    wx = rng.uniform(0.0, grid.world_width)
                    wy = rng.uniform(0.0, grid.world_height)
                    if not disc_hits_grid(grid.cells, grid.resolution, wx, wy, radius):
                        pts.append((wx, wy))
                        break
                else:
                    raise SpawnError("no free waypoint after 1000 attempts")
            ob.waypoints = pts[1:]
        obstacles.append(ob)
    return obstacles
