"""Per-step reward: sparse success/collision terms plus dense shaping.

total = r_s + r_c + r_d + r_p + r_m, summed in that fixed order:
  r_s  +15    goal reached this step
  r_c  -10    collision this step
  r_d  -0.15  closer to an obstacle than d_safe (suppressed on collision
              steps so the two penalties do not stack)
  r_p  progress toward the goal: w_p * d if d >= 0 else w_n * d, where
       d = previous goal distance - current goal distance
  r_m  -0.01  commanded displacement exactly zero
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class StepSnapshot:
    """State the reward needs from one simulator step."""
    goal_distance: float
    min_clearance: float   # minimum lidar range this step
    displacement: float    # |pose delta| commanded this step
    collision: bool
    goal_reached: bool


@dataclass(frozen=True)
class RewardBreakdown:
    r_s: float
    r_c: float
    r_d: float
    r_p: float
    r_m: float
    total: float


def compute_reward(prev: StepSnapshot, curr: StepSnapshot, cfg) -> RewardBreakdown:
    """Reward for the transition prev -> curr under cfg (w_p, w_n, d_safe)."""
    r_s = 15.0 if curr.goal_reached else 0.0
    r_c = -10.0 if curr.collision else 0.0
    r_d = -0.15 if (curr.min_clearance < cfg.d_safe and not curr.collision) else 0.0
    d = prev.goal_distance - curr.goal_distance
    r_p = cfg.w_p * d if d >= 0.0 else cfg.w_n * d
    r_m = -0.01 if curr.displacement == 0.0 else 0.0
    total = r_s + r_c + r_d + r_p + r_m
    return RewardBreakdown(r_s, r_c, r_d, r_p, r_m, total)
