"""Episodic training environment for the local planner.

Each episode runs the full hierarchical stack on a freshly randomized map:
a global path is planned, the horizon subgoal slides along it, and the
policy is rewarded for progress toward the current subgoal (success and
collision terms still key on the true goal). All per-episode randomness —
map layout, endpoints, obstacle spawns, initial heading — derives from the
single constructor seed, so rollouts are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..global_planner import GlobalPlanner, InvalidEndpoint, NoPath
from ..intermediate_planner import HorizonParams, SubgoalState, update
from ..local_planner import Action
from ..worldsim.grid import MapGenParams, OccupancyGrid, generate_random_map
from ..worldsim.obstacles import SpawnError, spawn_obstacles
from ..worldsim.world import RobotState, World, WorldConfig
from .observation import Observation, build_observation
from .reward import RewardBreakdown, StepSnapshot, compute_reward


@dataclass(frozen=True)
class _RewardWeights:
    w_p: float = 0.25
    w_n: float = 0.4
    d_safe: float = 0.5


class EnvError(RuntimeError):
    """Episode setup failed (no feasible start/goal after many attempts)."""


class NavTrainEnv:
    """Randomized-map navigation episodes with subgoal-shaped rewards.

    reset(n_obstacles) draws a new map, picks start/goal with a global path
    of length within ``path_range`` (keeps goals reachable inside the step
    cap), spawns moving obstacles away from the start, and returns the
    first observation. step(action) advances one world tick and returns
    (observation, reward breakdown, done, info).
    """

    def __init__(
        self,
        seed: int,
        map_params: MapGenParams | None = None,
        world_config: WorldConfig | None = None,
        horizon: HorizonParams | None = None,
        v_obs: float = 0.1,
        obstacle_model: str = "random-walk",
        path_range: tuple[float, float] = (1.0, 3.2),
        max_episode_steps: int = 128,
        w_p: float = 0.25,
        w_n: float = 0.4,
        d_safe: float = 0.5,
        inflation_radius: float = 0.35,
    ):
        self._rng = np.random.default_rng(seed)
        self._map_params = map_params or MapGenParams(n_walls=2, n_static=3)
        self._world_cfg = world_config or WorldConfig()
        self._horizon = horizon or HorizonParams()
        self._v_obs = v_obs
        self._model = obstacle_model
        self._path_range = path_range
        self._max_steps = max_episode_steps
        self._reward_cfg = _RewardWeights(w_p, w_n, d_safe)
        self._inflation = inflation_radius
        self.world: World | None = None
        self.episode_steps = 0

    # -- episode setup ----------------------------------------------------

    def _draw_grid(self) -> OccupancyGrid:
        return generate_random_map(int(self._rng.integers(2**31)),
                                   self._map_params)

    def _pick_endpoints(self, planner: GlobalPlanner):
        """Start/goal cell centers with a path length inside path_range."""
        free = np.argwhere(planner.pgrid.inflated == 0)
        if len(free) < 2:
            return None
        lo, hi = self._path_range
        for _ in range(40):
            i, j = self._rng.integers(0, len(free), size=2)
            start = planner.pgrid.base.cell_center(*free[i])
            goal = planner.pgrid.base.cell_center(*free[j])
            try:
                path = planner.plan(start, goal)
            except (NoPath, InvalidEndpoint):
                continue
            if lo <= path.total_length <= hi:
                return start, goal, path
        return None

    def reset(self, n_obstacles: int = 0) -> Observation:
        for _ in range(50):
            grid = self._draw_grid()
            planner = GlobalPlanner(grid, inflation_radius=self._inflation)
            picked = self._pick_endpoints(planner)
            if picked is None:
                continue
            start, goal, path = picked
            try:
                obstacles = spawn_obstacles(
                    grid, n_obstacles, self._v_obs, model=self._model,
                    seed=int(self._rng.integers(2**31)),
                    keep_out=[(start[0], start[1], 1.0),
                              (goal[0], goal[1], 0.6)],
                )
            except SpawnError:
                continue
            return self._begin(grid, planner, start, goal, path, obstacles)
        raise EnvError("could not build a feasible episode in 50 map draws")

    def _begin(self, grid, planner, start, goal, path, obstacles,
               theta: float | None = None) -> Observation:
        if theta is None:
            theta = float(self._rng.uniform(-math.pi, math.pi))
        self.world = World(self._world_cfg, grid,
                           RobotState(start[0], start[1], theta), obstacles)
        self._planner = planner
        self._goal = goal
        self._sub = SubgoalState(path=path)
        self.episode_steps = 0
        subgoal = update(self._sub, self.world.robot, planner, goal,
                         self._horizon, now=0.0)
        self._sub.replan_count = 0  # setup planning isn't an episode replan
        return build_observation(self.world.raycast(), self.world.robot,
                                 (subgoal.x, subgoal.y))

    # -- stepping ----------------------------------------------------------

    def step(self, action: Action):
        if self.world is None:
            raise RuntimeError("call reset() before step()")
        w = self.world
        prev = (w.robot.x, w.robot.y)
        w.step(action.v, action.omega)
        self.episode_steps += 1

        planner_failed = False
        try:
            subgoal = update(self._sub, w.robot, self._planner, self._goal,
                             self._horizon, now=w.time)
        except (NoPath, InvalidEndpoint):
            # robot drifted somewhere the global planner can't serve; end
            # the episode rather than navigate blind
            planner_failed = True
            subgoal = self._sub.subgoal

        scan = w.raycast()
        sub_xy = (subgoal.x, subgoal.y)
        goal_d = math.hypot(w.robot.x - self._goal[0],
                            w.robot.y - self._goal[1])
        reached = goal_d < self._world_cfg.goal_radius
        curr = StepSnapshot(
            goal_distance=math.hypot(w.robot.x - sub_xy[0], w.robot.y - sub_xy[1]),
            min_clearance=float(scan.ranges.min()),
            displacement=abs(w.robot.v) * self._world_cfg.dt,
            collision=w.collided,
            goal_reached=reached,
        )
        before = StepSnapshot(
            goal_distance=math.hypot(prev[0] - sub_xy[0], prev[1] - sub_xy[1]),
            min_clearance=curr.min_clearance,
            displacement=0.0, collision=False, goal_reached=False,
        )
        rb: RewardBreakdown = compute_reward(before, curr, self._reward_cfg)
        done = (w.collided or reached or planner_failed
                or self.episode_steps >= self._max_steps)
        info = {
            "success": reached,
            "collision": w.collided,
            "replans": self._sub.replan_count,
            "planner_failure": planner_failed,
            "goal_distance": goal_d,
        }
        obs = build_observation(scan, w.robot, sub_xy)
        return obs, rb, done, info


class TrivialEnv(NavTrainEnv):
    """Fixed degenerate task: empty bordered map, goal 2 m dead ahead.

    Obstacle counts passed to reset() are ignored; every episode is
    identical up to the policy's own actions, which makes learning progress
    easy to measure.
    """

    def __init__(self, seed: int, goal_ahead: float = 2.0,
                 max_episode_steps: int = 128, **kwargs):
        super().__init__(seed, max_episode_steps=max_episode_steps, **kwargs)
        self._goal_ahead = goal_ahead

    def reset(self, n_obstacles: int = 0) -> Observation:
        grid = OccupancyGrid.empty(100, 100, 0.1)
        planner = GlobalPlanner(grid, inflation_radius=self._inflation)
        start = (2.05, 5.05)
        goal = (start[0] + self._goal_ahead, start[1])
        path = planner.plan(start, goal)
        return self._begin(grid, planner, start, goal, path, [], theta=0.0)
