"""Deterministic 2D world simulation."""
from .grid import MapGenError, MapGenParams, OccupancyGrid, generate_random_map
from .obstacles import MOTION_MODELS, ObstacleState, SpawnError, spawn_obstacles
from .world import LidarScan, RobotState, World, WorldConfig, check_collision, raycast

__all__ = [
    "MapGenError",
    "MapGenParams",
    "OccupancyGrid",
    "generate_random_map",
    "MOTION_MODELS",
    "ObstacleState",
    "SpawnError",
    "spawn_obstacles",
    "LidarScan",
    "RobotState",
    "World",
    "WorldConfig",
    "check_collision",
    "raycast",
]
