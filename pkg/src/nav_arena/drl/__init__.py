"""Learning stack: observations, reward shaping, recurrent actor-critic
network with hand-rolled exact gradients, checkpoints, curriculum, and the
asynchronous training loop."""
from .checkpoint import default_policy_path, load_params, save_params
from .curriculum import CurriculumState, curriculum_update
from .network import (
    HiddenState,
    NetworkParams,
    NonFiniteLoss,
    Trajectory,
    compute_gradients,
    discounted_returns,
    forward,
    gae_advantages,
    softmax,
)
from .observation import N_LIDAR_BINS, Observation, build_observation
from .reward import RewardBreakdown, StepSnapshot, compute_reward

__all__ = [
    "CurriculumState",
    "HiddenState",
    "N_LIDAR_BINS",
    "NetworkParams",
    "NonFiniteLoss",
    "Observation",
    "RewardBreakdown",
    "StepSnapshot",
    "Trajectory",
    "build_observation",
    "compute_gradients",
    "compute_reward",
    "curriculum_update",
    "default_policy_path",
    "discounted_returns",
    "forward",
    "gae_advantages",
    "load_params",
    "save_params",
    "softmax",
]
