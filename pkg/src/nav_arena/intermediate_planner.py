"""Subgoal generation on a spatial horizon, with replanning triggers.

The subgoal is where a circle of radius ``d_ahead`` around the robot cuts
the global path, taking the intersection furthest along the path; when the
global goal itself falls inside the circle it becomes the subgoal. A circle
that misses the path entirely, drifting off-course beyond ``d_off``, or
standing still longer than ``t_lim`` all trigger a global replan from the
robot's current position.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import circle_polyline_intersections, point_polyline_distance
from .global_planner import GlobalPath, GlobalPlanner, path_query
from .worldsim.world import RobotState


@dataclass
class HorizonParams:
    d_ahead: float = 1.55  # look-ahead circle radius
    t_lim: float = 4.0     # stuck-time limit before replanning
    d_off: float = 1.0     # off-course distance before replanning
    move_eps: float = 0.01  # speeds below this count as "not moving"

    def __post_init__(self):
        for name in ("d_ahead", "t_lim", "d_off", "move_eps"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class Subgoal:
    x: float
    y: float
    arclength: float      # along the current global path
    is_goal: bool = False  # the global goal fell inside the horizon circle


@dataclass
class SubgoalState:
    """Per-episode bookkeeping for subgoal updates."""
    path: GlobalPath | None = None
    subgoal: Subgoal | None = None
    last_progress_time: float = 0.0
    replan_count: int = 0


def compute_subgoal(path: GlobalPath, p_r, d_ahead: float) -> Subgoal | None:
    """Subgoal on ``path`` for a robot at ``p_r``; None means replan needed.

    Returns the global goal when it lies strictly inside the horizon circle,
    otherwise the circle/path intersection with maximal arclength. None is
    the miss case: the circle does not touch the path anywhere.
    """
    gx, gy = float(path.poses[-1, 0]), float(path.poses[-1, 1])
    if math.hypot(gx - p_r[0], gy - p_r[1]) < d_ahead:
        return Subgoal(gx, gy, path.total_length, is_goal=True)
    hits = circle_polyline_intersections(
        path.poses, path.cumulative_arclength, p_r, d_ahead
    )
    if hits.size == 0:
        return None
    s = min(float(hits[-1]), path.total_length)  # guard arclength float dust
    x, y = path_query(path, s)
    return Subgoal(x, y, s)


def should_replan(
    state: SubgoalState,
    robot: RobotState,
    path: GlobalPath,
    params: HorizonParams,
    now: float,
) -> bool:
    """Off-course beyond d_off, or no movement for longer than t_lim."""
    if point_polyline_distance((robot.x, robot.y), path.poses) > params.d_off:
        return True
    return (now - state.last_progress_time) > params.t_lim


def update(
    state: SubgoalState,
    robot: RobotState,
    planner: GlobalPlanner,
    goal,
    params: HorizonParams,
    now: float,
) -> Subgoal:
    """Advance the subgoal state machine one tick and return the subgoal.

    Plans the initial path on first use. Replans from the robot's current
    position when triggered (off-course / stuck / horizon circle missing the
    path), at most once per call; if the fresh path still misses the circle,
    falls back to the path pose closest to the robot. Mutates ``state``
    (path, subgoal, timers, replan_count) in place. NoPath from the global
    planner propagates.
    """
    p_r = (robot.x, robot.y)
    if abs(robot.v) > params.move_eps:
        state.last_progress_time = now

    replanned = False
    if state.path is None:
        state.path = planner.plan(p_r, goal)
        state.last_progress_time = now
    elif should_replan(state, robot, state.path, params, now):
        state.path = planner.plan(p_r, goal)
        state.replan_count += 1
        state.last_progress_time = now  # a fresh plan restarts the stuck clock
        replanned = True

    sub = compute_subgoal(state.path, p_r, params.d_ahead)
    if sub is None and not replanned:
        state.path = planner.plan(p_r, goal)
        state.replan_count += 1
        state.last_progress_time = now
        sub = compute_subgoal(state.path, p_r, params.d_ahead)
    if sub is None:
        # fresh path still outside the horizon: steer at its closest pose
        d = state.path.poses - np.asarray(p_r, dtype=float)
        i = int(np.argmin(np.einsum("ij,ij->i", d, d)))
        sub = Subgoal(
            float(state.path.poses[i, 0]),
            float(state.path.poses[i, 1]),
            float(state.path.cumulative_arclength[i]),
        )
    state.subgoal = sub
    return sub
