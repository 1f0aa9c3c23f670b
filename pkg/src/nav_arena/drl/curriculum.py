"""Obstacle-count curriculum keyed on a success-rate moving window."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field


@dataclass
class CurriculumState:
    obstacle_count: int = 0
    window: deque = field(default_factory=lambda: deque(maxlen=100))
    up_threshold: float = 0.8
    down_threshold: float = 0.4
    step: int = 2
    max_obstacles: int = 20

    @property
    def success_rate(self) -> float:
        if not self.window:
            return 0.0
        return sum(self.window) / len(self.window)


def curriculum_update(state: CurriculumState, success: bool) -> CurriculumState:
    """Record one episode outcome; adjust obstacle count on a full window.

    A full window averaging >= up_threshold adds ``step`` obstacles (capped);
    <= down_threshold removes ``step`` (floored at 0). Either adjustment
    clears the window so the next decision uses fresh episodes only.
    """
    state.window.append(1.0 if success else 0.0)
    if len(state.window) < state.window.maxlen:
        return state
    rate = state.success_rate
    if rate >= state.up_threshold:
        state.obstacle_count = min(state.obstacle_count + state.step, state.max_obstacles)
        state.window.clear()
    elif rate <= state.down_threshold:
        state.obstacle_count = max(state.obstacle_count - state.step, 0)
        state.window.clear()
    return state
