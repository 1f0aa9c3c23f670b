"""Fixed-timestep 2D world: unicycle robot, disc obstacles, lidar.

Stepping is strictly deterministic: identical (seed, config, action
sequence) produce bit-identical trajectories. Order within one step:
clamp action, integrate robot pose (theta evaluated before the update),
advance obstacles, set the collision flag, advance the clock.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..geometry import wrap_angle
from ..kernels import disc_hits_grid, raycast_ranges
from .grid import OccupancyGrid
from .obstacles import ObstacleState


@dataclass
class WorldConfig:
    dt: float = 0.1
    n_beams_raw: int = 360
    range_max: float = 3.5
    v_max: float = 0.5
    omega_max: float = 1.5
    goal_radius: float = 0.3
    robot_radius: float = 0.3
    lidar_noise_std: float = 0.0  # optional Gaussian noise on ranges
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.n_beams_raw < 344:
            raise ValueError("need at least 344 raw beams for observation downsampling")


@dataclass
class RobotState:
    x: float
    y: float
    theta: float
    v: float = 0.0
    omega: float = 0.0
    radius: float = 0.3


@dataclass
class LidarScan:
    n_beams: int
    angle_min: float
    angle_increment: float
    range_max: float
    ranges: np.ndarray = field(repr=False)

    def beam_angles(self, theta: float = 0.0) -> np.ndarray:
        """World-frame beam angles for a sensor heading of theta."""
        return theta + self.angle_min + self.angle_increment * np.arange(self.n_beams)


def check_collision(robot: RobotState, grid: OccupancyGrid, obstacles) -> bool:
    """Robot disc overlap with occupied cells or obstacle discs (strict <)."""
    if disc_hits_grid(grid.cells, grid.resolution, robot.x, robot.y, robot.radius):
        return True
    for ob in obstacles:
        if math.hypot(robot.x - ob.x, robot.y - ob.y) < robot.radius + ob.radius:
            return True
    return False


class World:
    """One simulation instance; single-threaded, freely movable across threads."""

    def __init__(
        self,
        config: WorldConfig,
        grid: OccupancyGrid,
        robot: RobotState,
        obstacles: list[ObstacleState] | None = None,
    ):
        self.config = config
        self.grid = grid
        self.robot = replace(robot, radius=config.robot_radius)
        self.obstacles = list(obstacles or [])
        self.time = 0.0
        self.collided = False
        self._noise_rng = np.random.default_rng(config.seed) if config.lidar_noise_std > 0 else None

    def step(self, v: float, omega: float) -> None:
        cfg = self.config
        r = self.robot
        r.v = min(cfg.v_max, max(-cfg.v_max, v))
        r.omega = min(cfg.omega_max, max(-cfg.omega_max, omega))
        r.x += r.v * math.cos(r.theta) * cfg.dt
        r.y += r.v * math.sin(r.theta) * cfg.dt
        r.theta = wrap_angle(r.theta + r.omega * cfg.dt)
        for ob in self.obstacles:
            ob.step(self.grid, cfg.dt)
        self.collided = check_collision(r, self.grid, self.obstacles)
        self.time += cfg.dt

    def raycast(self, n_beams: int | None = None) -> LidarScan:
        cfg = self.config
        n = n_beams or cfg.n_beams_raw
        angle_min = -math.pi
        inc = 2.0 * math.pi / n
        angles = self.robot.theta + angle_min + inc * np.arange(n)
        circles = None
        if self.obstacles:
            circles = np.array([[ob.x, ob.y, ob.radius] for ob in self.obstacles])
        ranges = raycast_ranges(
            self.grid.cells, self.grid.resolution,
            self.robot.x, self.robot.y, angles, cfg.range_max, circles,
        )
        if self._noise_rng is not None:
            ranges = np.clip(
                ranges + self._noise_rng.normal(0.0, cfg.lidar_noise_std, n),
                1e-6, cfg.range_max,
            )
        return LidarScan(n, angle_min, inc, cfg.range_max, ranges)

    def check_collision(self) -> bool:
        return check_collision(self.robot, self.grid, self.obstacles)


def raycast(
    grid: OccupancyGrid,
    obstacles,
    pose: tuple[float, float, float],
    n_beams: int,
    range_max: float,
) -> LidarScan:
    """Standalone raycast for an arbitrary pose (x, y, theta)."""
    x, y, theta = pose
    angle_min = -math.pi
    inc = 2.0 * math.pi / n_beams
    angles = theta + angle_min + inc * np.arange(n_beams)
    circles = None
    if obstacles:
        circles = np.array([[ob.x, ob.y, ob.radius] for ob in obstacles])
    ranges = raycast_ranges(grid.cells, grid.resolution, x, y, angles, range_max, circles)
    return LidarScan(n_beams, angle_min, inc, range_max, ranges)
