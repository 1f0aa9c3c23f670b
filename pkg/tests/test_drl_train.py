"""Training-loop tests: optimizer arithmetic, determinism, logging, and
learning on a fixed straight-line task."""
import csv
import math
from types import SimpleNamespace

import numpy as np
import pytest

from nav_arena.drl.environment import TrivialEnv
from nav_arena.drl.network import NetworkParams
from nav_arena.drl.train import (
    LOG_FIELDS,
    Adam,
    TrainConfig,
    TrainingAborted,
    a3c_train,
)


class StubObs:
    def vector(self):
        return np.zeros(346)


class AlwaysWinEnv:
    """Two-step episodes that always end in success."""

    def __init__(self):
        self.t = 0

    def reset(self, n_obstacles):
        self.t = 0
        return StubObs()

    def step(self, action):
        self.t += 1
        done = self.t >= 2
        return StubObs(), SimpleNamespace(total=1.0), done, {"success": done}


class BombEnv:
    """Crashes on the third reset of worker 1; healthy everywhere else."""

    def __init__(self, worker_id):
        self.worker_id = worker_id
        self.resets = 0
        self.t = 0

    def reset(self, n_obstacles):
        self.resets += 1
        if self.worker_id == 1 and self.resets >= 3:
            raise RuntimeError("boom")
        self.t = 0
        return StubObs()

    def step(self, action):
        self.t += 1
        return StubObs(), SimpleNamespace(total=0.0), self.t >= 4, {"success": False}


def small_cfg(**kw):
    kw.setdefault("n_workers", 1)
    kw.setdefault("hidden1", 16)
    kw.setdefault("hidden2", 16)
    kw.setdefault("gru_hidden", 8)
    kw.setdefault("total_steps", 256)
    return TrainConfig(**kw)


# --- Adam ---------------------------------------------------------------

def test_adam_matches_scalar_reference():
    params = NetworkParams.init(input_dim=3, h1=2, h2=2, h_gru=2,
                                n_actions=2, seed=5)
    lr, b1, b2, eps = 1e-2, 0.9, 0.999, 1e-5
    opt = Adam(params, lr, eps=eps)
    rng = np.random.default_rng(0)

    # pure-float Adam run alongside, element by element
    ref = {name: a.copy() for name, a in params.arrays()}
    m = {name: np.zeros_like(a) for name, a in params.arrays()}
    v = {name: np.zeros_like(a) for name, a in params.arrays()}
    for t in range(1, 4):
        grads = params.zeros_like()
        drawn = {}
        for name, g in grads.arrays():
            drawn[name] = rng.normal(size=g.shape)
            g[:] = drawn[name]
        opt.apply(params, grads)

        b1c = 1.0 - b1 ** t
        b2c = 1.0 - b2 ** t
        for name, arr in ref.items():
            g = drawn[name]
            for idx in np.ndindex(arr.shape):
                mi = b1 * float(m[name][idx]) + (1.0 - b1) * float(g[idx])
                vi = b2 * float(v[name][idx]) + (1.0 - b2) * float(g[idx]) ** 2
                m[name][idx] = mi
                v[name][idx] = vi
                arr[idx] -= lr * (mi / b1c) / (math.sqrt(vi / b2c) + eps)

    for name, a in params.arrays():
        np.testing.assert_allclose(a, ref[name], rtol=0, atol=1e-10)


# --- config validation ----------------------------------------------------

@pytest.mark.parametrize("bad", [
    dict(gamma=0.0),
    dict(gamma=1.0),
    dict(learning_rate=0.0),
    dict(adam_epsilon=0.0),
    dict(n_workers=0),
    dict(rollout_length=0),
])
def test_config_rejects_bad_values(bad):
    with pytest.raises(ValueError):
        TrainConfig(**bad)


# --- determinism ----------------------------------------------------------

def test_single_worker_training_is_bit_deterministic():
    def run():
        cfg = small_cfg(total_steps=1024, seed=3)
        return a3c_train(cfg, env_factory=lambda wid, seed: TrivialEnv(seed))

    params_a, rows_a = run()
    params_b, rows_b = run()
    for (name, a), (_, b) in zip(params_a.arrays(), params_b.arrays()):
        assert np.array_equal(a, b), f"{name} differs between identical runs"
    strip = lambda row: {k: v for k, v in row.items() if k != "wall_time_s"}
    assert [strip(r) for r in rows_a] == [strip(r) for r in rows_b]


# --- logging ----------------------------------------------------------------

def test_episode_log_streams_to_csv(tmp_path):
    log = tmp_path / "train.csv"
    cfg = small_cfg(total_steps=512, seed=2)
    _, rows = a3c_train(cfg, env_factory=lambda wid, seed: TrivialEnv(seed),
                        log_path=log)
    with open(log, newline="") as f:
        reader = csv.DictReader(f)
        assert tuple(reader.fieldnames) == LOG_FIELDS
        logged = list(reader)
    assert len(logged) == len(rows) > 0
    for disk, mem in zip(logged, rows):
        assert int(disk["episode"]) == mem["episode"]
        assert int(disk["steps"]) == mem["steps"]
        assert float(disk["total_reward"]) == mem["total_reward"]
        assert int(disk["success"]) == mem["success"]


# --- stop conditions --------------------------------------------------------

def test_success_stop_ends_training_early():
    cfg = small_cfg(total_steps=100_000, rollout_length=8, success_stop=0.9)
    _, rows = a3c_train(cfg, env_factory=lambda wid, seed: AlwaysWinEnv())
    # stops at the first update where the 100-episode success window fills
    assert len(rows) == 100
    assert all(r["success"] == 1 for r in rows)


def test_worker_crash_aborts_with_partial_log(tmp_path):
    log = tmp_path / "partial.csv"
    cfg = small_cfg(n_workers=2, total_steps=100_000, rollout_length=8)
    with pytest.raises(TrainingAborted, match="worker 1 crashed"):
        a3c_train(cfg, env_factory=lambda wid, seed: BombEnv(wid),
                  log_path=log)
    with open(log, newline="") as f:
        assert tuple(next(csv.reader(f))) == LOG_FIELDS


def test_crash_exception_carries_partial_rows():
    cfg = small_cfg(n_workers=2, total_steps=100_000, rollout_length=8)
    try:
        a3c_train(cfg, env_factory=lambda wid, seed: BombEnv(wid))
    except TrainingAborted as e:
        assert isinstance(e.rows, list)
        for row in e.rows:
            assert set(row) == set(LOG_FIELDS)
    else:
        pytest.fail("expected TrainingAborted")


# --- learning ---------------------------------------------------------------

def test_gae_training_runs_and_stays_finite():
    cfg = small_cfg(total_steps=512, use_gae=True, seed=4)
    params, _ = a3c_train(cfg, env_factory=lambda wid, seed: TrivialEnv(seed))
    for name, a in params.arrays():
        assert np.all(np.isfinite(a)), f"{name} went non-finite"


def test_reward_improves_on_fixed_straight_task():
    # empty room, goal 2 m ahead: the smoothed episode reward should rise
    # from the first tenth of training to the last
    cfg = TrainConfig(n_workers=1, total_steps=163_840, seed=7,
                      hidden1=32, hidden2=32, gru_hidden=16, use_gae=True)
    _, rows = a3c_train(cfg, env_factory=lambda wid, seed: TrivialEnv(seed))
    rewards = np.array([r["total_reward"] for r in rows])
    assert len(rewards) > 500
    smooth = np.convolve(rewards, np.full(50, 1 / 50), mode="valid")
    k = len(smooth) // 10
    first, last = smooth[:k].mean(), smooth[-k:].mean()
    assert last > first, f"no improvement: first decile {first:.2f}, last {last:.2f}"
