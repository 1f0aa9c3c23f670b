"""Local planners steering toward the current subgoal.

Two interchangeable planners:
- ``dwa_plan``: dynamic-window sampling with constant-twist rollouts scored
  on heading, clearance, and speed against the latest lidar scan.
- ``policy_plan``: the learned recurrent policy over a discrete action set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .drl.network import HiddenState, NetworkParams, forward, softmax
from .geometry import wrap_angle
from .kernels import min_clearances
from .worldsim.world import LidarScan, RobotState


@dataclass(frozen=True)
class Action:
    v: float
    omega: float


class DiscreteActionSet:
    """Ordered action vocabulary for the discrete policy."""

    def __init__(self, actions):
        self.actions = tuple(Action(float(v), float(w)) for v, w in actions)
        if len(self.actions) < 2:
            raise ValueError("need at least two actions")
        if not any(a.v == 0.0 and a.omega == 0.0 for a in self.actions):
            raise ValueError("action set must contain the stop action (0, 0)")

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, i: int) -> Action:
        return self.actions[i]

    def __iter__(self):
        return iter(self.actions)


# forward arc, four turn rates, stop, and gentle reverse
DEFAULT_ACTIONS = DiscreteActionSet([
    (0.3, 0.0), (0.3, 0.75), (0.3, -0.75), (0.3, 1.5), (0.3, -1.5),
    (0.0, 0.0), (-0.15, 0.0),
])


@dataclass
class DwaParams:
    n_v: int = 10
    n_omega: int = 20
    t_sim: float = 1.5        # rollout horizon, seconds
    dt: float = 0.1           # rollout step and window horizon
    heading_weight: float = 0.8
    clearance_weight: float = 0.2
    velocity_weight: float = 0.2
    clearance_cap: float = 2.0
    accel_v: float = 2.0      # m/s^2 reachable window growth
    accel_omega: float = 5.0  # rad/s^2
    v_max: float = 0.5
    omega_max: float = 1.5
    robot_radius: float = 0.3

    def __post_init__(self):
        if self.t_sim <= 0.0 or self.dt <= 0.0:
            raise ValueError("t_sim and dt must be positive")
        if min(self.heading_weight, self.clearance_weight, self.velocity_weight) < 0:
            raise ValueError("weights must be >= 0")


def scan_points(scan: LidarScan, robot: RobotState):
    """World-frame endpoints of beams that hit something (range < max)."""
    hit = scan.ranges < scan.range_max
    angles = scan.beam_angles(robot.theta)[hit]
    r = scan.ranges[hit]
    return robot.x + r * np.cos(angles), robot.y + r * np.sin(angles)


def rollout_poses(robot: RobotState, v: float, omega: float, t_sim: float, dt: float):
    """Constant-twist Euler rollout; returns (xs, ys, thetas) after each step."""
    n = int(round(t_sim / dt))
    xs = np.empty(n)
    ys = np.empty(n)
    ths = np.empty(n)
    x, y, th = robot.x, robot.y, robot.theta
    for i in range(n):
        x += v * math.cos(th) * dt
        y += v * math.sin(th) * dt
        th = wrap_angle(th + omega * dt)
        xs[i], ys[i], ths[i] = x, y, th
    return xs, ys, ths


def _window_samples(robot: RobotState, p: DwaParams):
    """The (v, omega) sample grid reachable within one dt."""
    v_lo = max(0.0, robot.v - p.accel_v * p.dt)
    v_hi = min(p.v_max, robot.v + p.accel_v * p.dt)
    w_lo = max(-p.omega_max, robot.omega - p.accel_omega * p.dt)
    w_hi = min(p.omega_max, robot.omega + p.accel_omega * p.dt)
    return np.linspace(v_lo, v_hi, p.n_v), np.linspace(w_lo, w_hi, p.n_omega)


def dwa_plan(scan: LidarScan, robot: RobotState, subgoal, params: DwaParams | None = None) -> Action:
    """Best dynamic-window action for the current scan and subgoal.

    Scores every (v, omega) sample's rollout as
        heading_weight * (pi - |heading error at rollout end|) / pi
      + clearance_weight * min(clearance, cap) / cap
      + velocity_weight * v / v_max
    discarding rollouts that pass closer than robot_radius to a scan point.
    Ties keep the lowest sample index. If every rollout is blocked, rotates
    in place at full rate toward the subgoal.
    """
    p = params or DwaParams()
    vs, ws = _window_samples(robot, p)
    n_steps = int(round(p.t_sim / p.dt))
    n_samples = len(vs) * len(ws)
    xs = np.empty((n_samples, n_steps))
    ys = np.empty((n_samples, n_steps))
    end_th = np.empty(n_samples)
    pairs = []
    for i, v in enumerate(vs):
        for j, w in enumerate(ws):
            k = i * len(ws) + j
            txs, tys, tths = rollout_poses(robot, v, w, p.t_sim, p.dt)
            xs[k], ys[k] = txs, tys
            end_th[k] = tths[-1]
            pairs.append((v, w))

    px, py = scan_points(scan, robot)
    clear = min_clearances(xs, ys, px, py)
    ok = clear >= p.robot_radius
    if not ok.any():
        aim = wrap_angle(math.atan2(subgoal[1] - robot.y, subgoal[0] - robot.x) - robot.theta)
        return Action(0.0, p.omega_max if aim >= 0.0 else -p.omega_max)

    err = np.abs([
        wrap_angle(math.atan2(subgoal[1] - ys[k, -1], subgoal[0] - xs[k, -1]) - end_th[k])
        for k in range(n_samples)
    ])
    v_arr = np.array([v for v, _ in pairs])
    score = (
        p.heading_weight * (math.pi - err) / math.pi
        + p.clearance_weight * np.minimum(clear, p.clearance_cap) / p.clearance_cap
        + p.velocity_weight * v_arr / p.v_max
    )
    score[~ok] = -np.inf
    best = int(np.argmax(score))  # first index wins ties
    return Action(*pairs[best])


def policy_plan(
    obs,
    params: NetworkParams,
    hidden: HiddenState,
    mode: str = "greedy",
    rng: np.random.Generator | None = None,
    actions: DiscreteActionSet = DEFAULT_ACTIONS,
) -> tuple[Action, HiddenState]:
    """One policy step: forward pass, then greedy argmax or a sampled draw.

    ``obs`` is the observation vector (or an object with .vector()). Returns
    the chosen action and the updated recurrent state.
    """
    vec = obs.vector() if hasattr(obs, "vector") else np.asarray(obs, dtype=float)
    logits, _, h = forward(params, vec, hidden)
    if len(actions) != len(logits):
        raise ValueError(f"action set size {len(actions)} != logits size {len(logits)}")
    if mode == "greedy":
        idx = int(np.argmax(logits))
    elif mode == "sample":
        if rng is None:
            raise ValueError("sample mode needs an rng")
        idx = int(rng.choice(len(logits), p=softmax(logits)))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return actions[idx], h
