from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import marching_raycast, random_free_pose
from nav_arena.worldsim import (
    MapGenParams,
    ObstacleState,
    OccupancyGrid,
    RobotState,
    World,
    WorldConfig,
    generate_random_map,
    raycast,
)


def test_empty_interior_all_range_max():
    g = OccupancyGrid.empty(100, 100, 0.1, border=False)
    scan = raycast(g, [], (5.0, 5.0, 0.3), 360, 3.5)
    assert scan.n_beams == 360
    assert scan.angle_min == -math.pi
    assert scan.angle_increment == pytest.approx(2 * math.pi / 360)
    assert np.all(scan.ranges == 3.5)


def test_wall_two_meters_ahead():
    g = OccupancyGrid.empty(60, 20, 0.1, border=False)
    g.cells[:, 25] = 1  # wall face at x = 2.5
    x0, y0 = g.cell_center(10, 5)  # (0.55, 1.05)
    scan = raycast(g, [], (x0, y0, 0.0), 360, 3.5)
    forward = scan.ranges[180]  # beam at angle_min + 180*inc = 0 = heading
    assert forward == pytest.approx(2.5 - x0, abs=1e-12)
    assert abs(forward - 2.0) <= 0.05  # contract: 2.0 +- resolution/2


def test_circle_on_beam_analytic():
    g = OccupancyGrid.empty(100, 100, 0.1, border=False)
    ob = ObstacleState(6.0, 5.0, 0.0, 0.0, radius=0.3)
    scan = raycast(g, [ob], (5.0, 5.0, 0.0), 360, 3.5)
    assert scan.ranges[180] == pytest.approx(0.7, abs=1e-12)
    # tangential beams miss
    graze = math.asin(0.3 / 1.0)
    beam_off = int(round((graze + 0.05) / scan.angle_increment))
    assert scan.ranges[180 + beam_off] == 3.5


def test_ranges_never_exceed_range_max_and_match_beam_count():
    g = generate_random_map(2, MapGenParams(50, 50, 0.1, n_walls=2, n_static=2))
    scan = raycast(g, [], (2.5, 2.5, 1.0), 517, 3.5)
    assert scan.n_beams == 517 and len(scan.ranges) == 517
    assert np.all(scan.ranges <= 3.5) and np.all(scan.ranges > 0)


def test_exact_traversal_beats_sampling_gaps():
    # a one-cell pillar: the exact traversal must see it dead-on
    g = OccupancyGrid.empty(100, 100, 0.1, border=False)
    g.cells[50, 80] = 1  # box [8.0, 8.1) x [5.0, 5.1)
    scan = raycast(g, [], (5.0, 5.05, 0.0), 360, 3.5)
    assert scan.ranges[180] == pytest.approx(3.0, abs=1e-12)


def test_raycast_matches_marching_oracle_on_random_scenes():
    rng = np.random.default_rng(77)
    checked = 0
    for seed in range(6):
        g = generate_random_map(
            seed, MapGenParams(40, 40, 0.1, n_walls=2, n_static=3)
        )
        circles = []
        for _ in range(3):
            cx, cy = random_free_pose(g, rng)
            circles.append((cx, cy, rng.uniform(0.15, 0.4)))
        obstacles = [ObstacleState(cx, cy, 0, 0, radius=r) for cx, cy, r in circles]
        for _ in range(5):
            while True:
                x, y = random_free_pose(g, rng)
                if all((x - cx) ** 2 + (y - cy) ** 2 > r * r for cx, cy, r in circles):
                    break
            theta = rng.uniform(-math.pi, math.pi)
            scan = raycast(g, obstacles, (x, y, theta), 8, 3.5)
            for i, r in enumerate(scan.ranges):
                a = theta - math.pi + i * scan.angle_increment
                want = marching_raycast(g.cells, 0.1, x, y, a, 3.5, circles)
                assert abs(r - want) <= 0.05, (seed, x, y, a)
                checked += 1
    assert checked == 240


def test_world_raycast_applies_heading_and_noise_hook():
    g = OccupancyGrid.empty(100, 100, 0.1, border=False)
    g.cells[:, 80] = 1
    w = World(WorldConfig(), g, RobotState(5.0, 5.0, 0.5))
    scan = w.raycast()
    # beam pointing along +x is the one at world angle 0: index such that
    # theta + angle_min + i*inc = 0
    i = int(round((0.0 - (-math.pi) - 0.5) / scan.angle_increment))
    a = 0.5 - math.pi + i * scan.angle_increment
    assert scan.ranges[i] == pytest.approx(3.0 / math.cos(a), abs=1e-9)

    noisy = World(WorldConfig(lidar_noise_std=0.01, seed=5), g,
                  RobotState(5.0, 5.0, 0.5))
    n1 = noisy.raycast().ranges
    assert not np.array_equal(n1, scan.ranges)
    noisy2 = World(WorldConfig(lidar_noise_std=0.01, seed=5), g,
                   RobotState(5.0, 5.0, 0.5))
    assert np.array_equal(n1, noisy2.raycast().ranges)
    assert np.all(n1 <= 3.5) and np.all(n1 > 0)


def test_origin_inside_obstacle_reports_zero():
    g = OccupancyGrid.empty(100, 100, 0.1, border=False)
    ob = ObstacleState(5.0, 5.0, 0.0, 0.0, radius=0.5)
    scan = raycast(g, [ob], (5.1, 5.0, 0.0), 16, 3.5)
    assert np.all(scan.ranges == 0.0)
