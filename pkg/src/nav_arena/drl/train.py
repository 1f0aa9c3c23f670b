"""Asynchronous advantage actor-critic training loop.

N workers each own an environment and a parameter snapshot. A worker runs
one rollout, backpropagates against its snapshot, and submits the gradients
to the master, which applies Adam updates serially and hands back fresh
parameters — so every worker trains on some complete recent version and no
torn parameter reads can occur. N=1 degenerates to a fully synchronous,
bit-deterministic loop using the exact same rollout code.
"""
from __future__ import annotations

import csv
import multiprocessing
import queue as queue_mod
import time
import traceback
from dataclasses import dataclass

import numpy as np

from ..local_planner import DEFAULT_ACTIONS
from .checkpoint import save_params
from .curriculum import CurriculumState, curriculum_update
from .environment import NavTrainEnv
from .network import NetworkParams, Trajectory, compute_gradients, forward, softmax
from .observation import N_LIDAR_BINS

LOG_FIELDS = ("episode", "steps", "total_reward", "success",
              "obstacle_count", "wall_time_s")


@dataclass
class TrainConfig:
    gamma: float = 0.99
    learning_rate: float = 2.5e-4
    adam_epsilon: float = 1e-5
    n_workers: int = 4
    rollout_length: int = 32
    batch_size: int = 64          # recorded from the source recipe; updates are per-rollout
    max_episode_steps: int = 128
    total_steps: int = 100_000
    success_stop: float | None = None  # stop once 100-episode success mean >= this
    gae_lambda: float = 0.95
    use_gae: bool = False
    value_clip_range: float = 0.2
    use_value_clip: bool = False
    max_gradient_norm: float = 0.5
    entropy_beta: float = 0.01
    value_coef: float = 0.5
    curriculum_up: float = 0.8
    curriculum_down: float = 0.4
    curriculum_step: int = 2
    max_obstacles: int = 20
    start_obstacles: int = 0
    d_safe: float = 0.5
    w_p: float = 0.25
    w_n: float = 0.4
    v_obs: float = 0.1
    seed: int = 0
    hidden1: int = 128
    hidden2: int = 64
    gru_hidden: int = 64
    # epsilon-greedy schedule recorded for completeness; A3C samples from
    # the softmax policy, so these stay inert
    epsilon_end: float = 0.05
    epsilon_max_steps: int = 100_000

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        if min(self.learning_rate, self.adam_epsilon) <= 0.0:
            raise ValueError("rates must be positive")
        if self.n_workers < 1 or self.rollout_length < 1:
            raise ValueError("n_workers and rollout_length must be >= 1")


class TrainingAborted(RuntimeError):
    """A worker crashed; the partial episode log is on .rows."""

    def __init__(self, message: str, rows: list):
        super().__init__(message)
        self.rows = rows


class Adam:
    """Standard Adam with bias correction, applied in place."""

    def __init__(self, params: NetworkParams, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-5):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = params.zeros_like()
        self.v = params.zeros_like()
        self.t = 0

    def apply(self, params: NetworkParams, grads: NetworkParams) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for (_, a), (_, m), (_, v), (_, g) in zip(
                params.arrays(), self.m.arrays(), self.v.arrays(),
                grads.arrays()):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            a -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def _seed_for(seed: int, worker_id: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, worker_id, stream])
               .generate_state(1)[0])


def default_env_factory(cfg: TrainConfig):
    def make(worker_id: int, seed: int) -> NavTrainEnv:
        return NavTrainEnv(seed, v_obs=cfg.v_obs,
                           max_episode_steps=cfg.max_episode_steps,
                           w_p=cfg.w_p, w_n=cfg.w_n, d_safe=cfg.d_safe)
    return make


class _WorkerLoop:
    """One worker's rollout/gradient cycle; usable inline or in a process."""

    def __init__(self, worker_id: int, cfg: TrainConfig, env_factory,
                 params: NetworkParams):
        self.cfg = cfg
        self.env = env_factory(worker_id, _seed_for(cfg.seed, worker_id, 0))
        self.rng = np.random.default_rng(_seed_for(cfg.seed, worker_id, 1))
        self.params = params
        self.obstacle_count = cfg.start_obstacles
        self.h = params.zero_hidden()
        self.obs = None
        self.episode_index = 0
        self.episode_reward = 0.0
        self.episode_steps = 0
        self.t0 = time.perf_counter()

    def work_once(self):
        """One rollout + backprop: (grads, report, episode rows, steps)."""
        cfg = self.cfg
        if self.obs is None:
            self.obs = self.env.reset(self.obstacle_count)
            self.h = self.params.zero_hidden()
        hidden_in = self.h.copy()
        obs_vecs, actions, rewards, terminals, values = [], [], [], [], []
        rows = []
        for _ in range(cfg.rollout_length):
            vec = self.obs.vector()
            logits, value, h_new = forward(self.params, vec, self.h)
            a = int(self.rng.choice(len(logits), p=softmax(logits)))
            obs2, rb, done, info = self.env.step(DEFAULT_ACTIONS[a])
            obs_vecs.append(vec)
            actions.append(a)
            rewards.append(rb.total)
            terminals.append(done)
            values.append(value)
            self.h = h_new
            self.episode_reward += rb.total
            self.episode_steps += 1
            if done:
                rows.append({
                    "episode": self.episode_index,
                    "steps": self.episode_steps,
                    "total_reward": self.episode_reward,
                    "success": int(info["success"]),
                    "obstacle_count": self.obstacle_count,
                    "wall_time_s": time.perf_counter() - self.t0,
                })
                self.episode_index += 1
                self.episode_reward = 0.0
                self.episode_steps = 0
                self.obs = self.env.reset(self.obstacle_count)
                self.h = self.params.zero_hidden()
            else:
                self.obs = obs2
        if terminals[-1]:
            bootstrap = 0.0
        else:
            bootstrap = float(forward(self.params, self.obs.vector(), self.h)[1])
        traj = Trajectory(np.array(obs_vecs), hidden_in, actions, rewards,
                          terminals, bootstrap, values=np.array(values))
        grads, report = compute_gradients(self.params, traj, cfg)
        return grads, report, rows, cfg.rollout_length

    def refresh(self, arrays: dict, obstacle_count: int) -> None:
        for name, a in self.params.arrays():
            a[:] = arrays[name]
        self.obstacle_count = obstacle_count


def _worker_main(worker_id, cfg, env_factory, pipe, out_queue):
    try:
        kind, arrays, count = pipe.recv()
        assert kind == "params"
        params = NetworkParams.init(
            input_dim=N_LIDAR_BINS + 2, h1=cfg.hidden1, h2=cfg.hidden2,
            h_gru=cfg.gru_hidden, n_actions=len(DEFAULT_ACTIONS), seed=0)
        loop = _WorkerLoop(worker_id, cfg, env_factory, params)
        loop.refresh(arrays, count)
        while True:
            grads, report, rows, n = loop.work_once()
            out_queue.put(("update", worker_id,
                           dict(grads.arrays()), report, rows, n))
            msg = pipe.recv()
            if msg[0] == "stop":
                return
            loop.refresh(msg[1], msg[2])
    except Exception:
        out_queue.put(("error", worker_id, traceback.format_exc()))


class _Master:
    """Serialized parameter store: Adam updates, curriculum, stop logic."""

    def __init__(self, cfg: TrainConfig, log_path=None, init_params=None,
                 checkpoint_path=None, checkpoint_every=0):
        self.cfg = cfg
        if init_params is not None:
            self.params = init_params.copy()
        else:
            self.params = NetworkParams.init(
                input_dim=N_LIDAR_BINS + 2, h1=cfg.hidden1, h2=cfg.hidden2,
                h_gru=cfg.gru_hidden, n_actions=len(DEFAULT_ACTIONS),
                seed=cfg.seed)
        self.opt = Adam(self.params, cfg.learning_rate,
                        eps=cfg.adam_epsilon)
        self.checkpoint_path = checkpoint_path
        self.checkpoint_every = checkpoint_every
        self._last_checkpoint = 0
        self.curriculum = CurriculumState(
            obstacle_count=cfg.start_obstacles,
            up_threshold=cfg.curriculum_up,
            down_threshold=cfg.curriculum_down,
            step=cfg.curriculum_step, max_obstacles=cfg.max_obstacles)
        self.success_window = []  # independent of curriculum window clears
        self.rows = []
        self.steps_done = 0
        self._log_file = None
        self._log_writer = None
        if log_path is not None:
            self._log_file = open(log_path, "w", newline="")
            self._log_writer = csv.DictWriter(self._log_file,
                                              fieldnames=LOG_FIELDS)
            self._log_writer.writeheader()

    def absorb(self, grads_arrays, rows, n_steps) -> None:
        g = self.params.zeros_like()
        for name, a in g.arrays():
            a[:] = grads_arrays[name]
        self.opt.apply(self.params, g)
        self.steps_done += n_steps
        if (self.checkpoint_path is not None and self.checkpoint_every > 0
                and self.steps_done - self._last_checkpoint >= self.checkpoint_every):
            save_params(self.params, self.checkpoint_path)
            self._last_checkpoint = self.steps_done
        for row in rows:
            curriculum_update(self.curriculum, bool(row["success"]))
            self.success_window.append(row["success"])
            if len(self.success_window) > 100:
                self.success_window.pop(0)
            self.rows.append(row)
            if self._log_writer is not None:
                self._log_writer.writerow(row)
                self._log_file.flush()

    def should_stop(self) -> bool:
        if self.steps_done >= self.cfg.total_steps:
            return True
        stop = self.cfg.success_stop
        return (stop is not None and len(self.success_window) >= 100
                and sum(self.success_window) / len(self.success_window) >= stop)

    def close(self) -> None:
        if self._log_file is not None:
            self._log_file.close()


def a3c_train(cfg: TrainConfig, env_factory=None, log_path=None,
              init_params=None, checkpoint_path=None, checkpoint_every=0):
    """Train the policy; returns (NetworkParams, episode log rows).

    env_factory(worker_id, seed) builds each worker's private environment;
    by default it draws randomized maps per episode. When log_path is given
    the episode log is streamed to CSV as it accumulates, so a crash leaves
    the partial log on disk. ``init_params`` warm-starts from an existing
    network (the optimizer state starts fresh); ``checkpoint_path`` with
    ``checkpoint_every`` > 0 saves the parameters every that many steps.
    A worker crash raises TrainingAborted with the partial rows attached.
    """
    if env_factory is None:
        env_factory = default_env_factory(cfg)
    master = _Master(cfg, log_path, init_params, checkpoint_path,
                     checkpoint_every)
    try:
        if master.should_stop():
            pass  # zero-step budget: hand back the initial parameters
        elif cfg.n_workers == 1:
            _train_inline(cfg, env_factory, master)
        else:
            _train_forked(cfg, env_factory, master)
    finally:
        master.close()
    return master.params, master.rows


def _train_inline(cfg, env_factory, master):
    loop = _WorkerLoop(0, cfg, env_factory, master.params.copy())
    while not master.should_stop():
        grads, report, rows, n = loop.work_once()
        master.absorb(dict(grads.arrays()), rows, n)
        loop.refresh(dict(master.params.arrays()),
                     master.curriculum.obstacle_count)


def _train_forked(cfg, env_factory, master):
    ctx = multiprocessing.get_context("fork")
    out_queue = ctx.Queue()
    pipes, procs = [], []
    for wid in range(cfg.n_workers):
        parent, child = ctx.Pipe()
        proc = ctx.Process(target=_worker_main,
                           args=(wid, cfg, env_factory, child, out_queue),
                           daemon=True)
        proc.start()
        child.close()
        pipes.append(parent)
        procs.append(proc)

    def snapshot():
        return ("params", {k: v.copy() for k, v in master.params.arrays()},
                master.curriculum.obstacle_count)

    active = set(range(cfg.n_workers))
    try:
        for pipe in pipes:
            pipe.send(snapshot())
        while active:
            try:
                msg = out_queue.get(timeout=10.0)
            except queue_mod.Empty:
                dead = [w for w in active if not procs[w].is_alive()]
                if dead:
                    raise TrainingAborted(
                        f"worker {dead[0]} died without reporting",
                        master.rows)
                continue
            if msg[0] == "error":
                raise TrainingAborted(
                    f"worker {msg[1]} crashed:\n{msg[2]}", master.rows)
            _, wid, grads_arrays, report, rows, n = msg
            master.absorb(grads_arrays, rows, n)
            if master.should_stop():
                pipes[wid].send(("stop",))
                active.discard(wid)
            else:
                pipes[wid].send(snapshot())
    finally:
        for wid in list(active):
            try:
                pipes[wid].send(("stop",))
            except (BrokenPipeError, OSError):
                pass
        for proc in procs:
            proc.join(timeout=5.0)
            if proc.is_alive():
                proc.terminate()
