"""Policy observation: min-pooled lidar bins plus the subgoal in robot frame."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import wrap_angle
from ..worldsim.world import LidarScan, RobotState

N_LIDAR_BINS = 344


@dataclass
class Observation:
    lidar: np.ndarray = field(repr=False)  # (344,) ranges normalized by range_max
    goal_distance: float = 0.0             # rho, meters to the subgoal
    goal_angle: float = 0.0                # phi, radians in (-pi, pi], robot frame

    def vector(self) -> np.ndarray:
        """Network input: lidar bins followed by rho and phi (length 346)."""
        out = np.empty(N_LIDAR_BINS + 2)
        out[:N_LIDAR_BINS] = self.lidar
        out[N_LIDAR_BINS] = self.goal_distance
        out[N_LIDAR_BINS + 1] = self.goal_angle
        return out


def build_observation(scan: LidarScan, robot: RobotState, subgoal) -> Observation:
    """Min-pool the raw scan into 344 bins and attach subgoal polar coords.

    Raw beam i lands in bin i*344 // n_beams, so bins partition the beams in
    angular order; each bin keeps its minimum range, normalized by range_max.
    """
    n = scan.n_beams
    if n < N_LIDAR_BINS:
        raise ValueError(f"need >= {N_LIDAR_BINS} raw beams, got {n}")
    bins = np.arange(n) * N_LIDAR_BINS // n
    pooled = np.full(N_LIDAR_BINS, np.inf)
    np.minimum.at(pooled, bins, scan.ranges)
    lidar = np.minimum(pooled / scan.range_max, 1.0)
    dx = subgoal[0] - robot.x
    dy = subgoal[1] - robot.y
    return Observation(
        lidar=lidar,
        goal_distance=math.hypot(dx, dy),
        goal_angle=wrap_angle(math.atan2(dy, dx) - robot.theta),
    )
