"""Recurrent actor-critic network in plain numpy with exact gradients.

Architecture: input -> FC(relu) -> FC(relu) -> GRU cell -> two linear heads
(action logits and a scalar value) on the shared recurrent feature. Gate
layout follows the common r/z/n convention with separate input and hidden
biases, and the reset gate multiplying the hidden candidate contribution:

    r = sigmoid(Wi_r x + bi_r + Wh_r h + bh_r)
    z = sigmoid(Wi_z x + bi_z + Wh_z h + bh_z)
    n = tanh(Wi_n x + bi_n + r * (Wh_n h + bh_n))
    h' = (1 - z) * n + z * h

Gradients are hand-derived backpropagation through the unrolled trajectory
(truncated at episode boundaries), checked against finite differences in the
test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.special import expit

HiddenState = np.ndarray  # (H,) GRU output, componentwise in (-1, 1)


class NonFiniteLoss(Exception):
    """Loss or gradients went NaN/inf; carries a diagnostics dict."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class NetworkParams:
    """All weights as named float64 arrays (field order is the wire order)."""
    w1: np.ndarray = field(repr=False)      # (H1, D)
    b1: np.ndarray = field(repr=False)      # (H1,)
    w2: np.ndarray = field(repr=False)      # (H2, H1)
    b2: np.ndarray = field(repr=False)      # (H2,)
    w_ih: np.ndarray = field(repr=False)    # (3H, H2) gates r, z, n stacked
    b_ih: np.ndarray = field(repr=False)    # (3H,)
    w_hh: np.ndarray = field(repr=False)    # (3H, H)
    b_hh: np.ndarray = field(repr=False)    # (3H,)
    w_actor: np.ndarray = field(repr=False)   # (K, H)
    b_actor: np.ndarray = field(repr=False)   # (K,)
    w_critic: np.ndarray = field(repr=False)  # (1, H)
    b_critic: np.ndarray = field(repr=False)  # (1,)

    def __post_init__(self):
        for f in fields(self):
            setattr(self, f.name, np.asarray(getattr(self, f.name), dtype=np.float64))
        h1, d = self.w1.shape
        h2 = self.w2.shape[0]
        h = self.w_hh.shape[1]
        k = self.w_actor.shape[0]
        expected = {
            "b1": (h1,), "w2": (h2, h1), "b2": (h2,),
            "w_ih": (3 * h, h2), "b_ih": (3 * h,),
            "w_hh": (3 * h, h), "b_hh": (3 * h,),
            "w_actor": (k, h), "b_actor": (k,),
            "w_critic": (1, h), "b_critic": (1,),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValueError(f"{name} has shape {got}, expected {shape}")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w_hh.shape[1]

    @property
    def n_actions(self) -> int:
        return self.w_actor.shape[0]

    @classmethod
    def init(cls, input_dim: int = 346, h1: int = 128, h2: int = 64,
             h_gru: int = 64, n_actions: int = 7, seed: int = 0) -> "NetworkParams":
        """Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization."""
        rng = np.random.default_rng(seed)

        def lin(rows, cols):
            bound = 1.0 / math.sqrt(cols)
            return (rng.uniform(-bound, bound, size=(rows, cols)),
                    rng.uniform(-bound, bound, size=rows))

        w1, b1 = lin(h1, input_dim)
        w2, b2 = lin(h2, h1)
        w_ih, b_ih = lin(3 * h_gru, h2)
        w_hh, b_hh = lin(3 * h_gru, h_gru)
        w_a, b_a = lin(n_actions, h_gru)
        w_c, b_c = lin(1, h_gru)
        return cls(w1, b1, w2, b2, w_ih, b_ih, w_hh, b_hh, w_a, b_a, w_c, b_c)

    def arrays(self) -> list[tuple[str, np.ndarray]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self)]

    def zeros_like(self) -> "NetworkParams":
        return NetworkParams(*(np.zeros_like(a) for _, a in self.arrays()))

    def copy(self) -> "NetworkParams":
        return NetworkParams(*(a.copy() for _, a in self.arrays()))

    def zero_hidden(self) -> HiddenState:
        return np.zeros(self.hidden_dim)


def softmax(logits: np.ndarray) -> np.ndarray:
    e = np.exp(logits - np.max(logits))
    return e / e.sum()


def _sigmoid(x):
    return expit(x)


def _forward_step(p: NetworkParams, x: np.ndarray, h: HiddenState) -> dict:
    """One unrolled step; returns every intermediate needed for backprop."""
    a1 = p.w1 @ x + p.b1
    z1 = np.maximum(a1, 0.0)
    a2 = p.w2 @ z1 + p.b2
    z2 = np.maximum(a2, 0.0)
    hg = p.hidden_dim
    gi = p.w_ih @ z2 + p.b_ih
    gh = p.w_hh @ h + p.b_hh
    r = _sigmoid(gi[:hg] + gh[:hg])
    z = _sigmoid(gi[hg:2 * hg] + gh[hg:2 * hg])
    n = np.tanh(gi[2 * hg:] + r * gh[2 * hg:])
    h_new = (1.0 - z) * n + z * h
    logits = p.w_actor @ h_new + p.b_actor
    value = float((p.w_critic @ h_new + p.b_critic)[0])
    return {
        "x": x, "h_prev": h, "a1": a1, "z1": z1, "a2": a2, "z2": z2,
        "gh_n": gh[2 * hg:], "r": r, "z": z, "n": n, "h": h_new,
        "logits": logits, "value": value,
    }


def forward(p: NetworkParams, obs, hidden: HiddenState):
    """(logits, value, new hidden) for one observation vector."""
    x = np.asarray(obs, dtype=np.float64)
    if x.shape != (p.input_dim,):
        raise ValueError(f"observation shape {x.shape} != ({p.input_dim},)")
    if np.shape(hidden) != (p.hidden_dim,):
        raise ValueError(f"hidden shape {np.shape(hidden)} != ({p.hidden_dim},)")
    c = _forward_step(p, x, np.asarray(hidden, dtype=np.float64))
    return c["logits"], c["value"], c["h"]


def discounted_returns(rewards, bootstrap: float, gamma: float,
                       terminal: bool) -> np.ndarray:
    """Backward recursion R_t = r_t + gamma * R_{t+1}, seeded with the
    bootstrap value (or 0 when the last step ended the episode)."""
    rewards = np.asarray(rewards, dtype=np.float64)
    if rewards.size == 0:
        raise ValueError("rewards must be nonempty")
    out = np.empty_like(rewards)
    acc = 0.0 if terminal else float(bootstrap)
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


@dataclass
class Trajectory:
    """A contiguous rollout from one environment.

    hidden_in is the recurrent state before step 0. terminals[t] marks the
    end of an episode at step t: the next step starts from a zero hidden
    state and no gradient or return flows across the boundary.
    bootstrap_value is the critic's estimate of the state after the last
    step (ignored when the last step is terminal). values optionally holds
    the critic outputs recorded at rollout time, required only when value
    clipping is enabled.
    """
    observations: np.ndarray          # (T, D)
    hidden_in: np.ndarray             # (H,)
    actions: np.ndarray               # (T,) int
    rewards: np.ndarray               # (T,) float
    terminals: np.ndarray             # (T,) bool
    bootstrap_value: float = 0.0
    values: np.ndarray | None = None  # (T,) critic outputs at rollout time

    def __post_init__(self):
        self.observations = np.asarray(self.observations, dtype=np.float64)
        self.actions = np.asarray(self.actions, dtype=np.int64)
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        self.terminals = np.asarray(self.terminals, dtype=bool)
        t = len(self.observations)
        if not (len(self.actions) == len(self.rewards) == len(self.terminals) == t):
            raise ValueError("trajectory field lengths disagree")
        if t == 0:
            raise ValueError("empty trajectory")
        if self.values is not None:
            self.values = np.asarray(self.values, dtype=np.float64)
            if len(self.values) != t:
                raise ValueError("trajectory field lengths disagree")

    def returns(self, gamma: float) -> np.ndarray:
        """Per-step discounted returns, split at episode boundaries."""
        out = np.empty_like(self.rewards)
        start = 0
        t_count = len(self.rewards)
        for t in range(t_count):
            if self.terminals[t]:
                out[start:t + 1] = discounted_returns(
                    self.rewards[start:t + 1], 0.0, gamma, terminal=True
                )
                start = t + 1
        if start < t_count:
            out[start:] = discounted_returns(
                self.rewards[start:], self.bootstrap_value, gamma, terminal=False
            )
        return out


def gae_advantages(traj: Trajectory, values: np.ndarray, gamma: float,
                   lam: float) -> np.ndarray:
    """Generalized-advantage estimates, split at episode boundaries.

    A_t = sum_k (gamma*lam)^k * delta_{t+k} with the one-step TD error
    delta_t = r_t + gamma*V_{t+1} - V_t; lam=1 recovers R_t - V_t.
    """
    t_count = len(values)
    out = np.empty(t_count)
    acc = 0.0
    v_next = 0.0 if traj.terminals[-1] else float(traj.bootstrap_value)
    for t in range(t_count - 1, -1, -1):
        if traj.terminals[t]:
            acc = 0.0
            v_next = 0.0
        delta = traj.rewards[t] + gamma * v_next - values[t]
        acc = delta + gamma * lam * acc
        out[t] = acc
        v_next = float(values[t])
    return out


def compute_gradients(p: NetworkParams, traj: Trajectory, cfg):
    """Exact policy-gradient + value-loss gradients over one trajectory.

    Loss (averaged over steps):
        -log pi(a_t) * A_t  +  value_coef * (R_t - V_t)^2  -  entropy_beta * H_t
    with the advantage A_t = R_t - V_t held constant. cfg.use_gae swaps the
    policy-term advantage for a GAE(gae_lambda) estimate; cfg.use_value_clip
    clamps the critic target movement to value_clip_range around the
    rollout-time values. Returns (grads, report) where grads is a
    NetworkParams of the same shapes after global-norm clipping to
    cfg.max_gradient_norm. Raises NonFiniteLoss when any loss term or
    gradient is non-finite.
    """
    t_count = len(traj.observations)
    returns = traj.returns(cfg.gamma)
    beta = getattr(cfg, "entropy_beta", 0.01)
    value_coef = getattr(cfg, "value_coef", 0.5)
    use_clip = getattr(cfg, "use_value_clip", False)
    clip_range = getattr(cfg, "value_clip_range", 0.2)
    if use_clip and traj.values is None:
        raise ValueError("value clipping needs rollout-time values on the trajectory")

    caches = []
    h = np.asarray(traj.hidden_in, dtype=np.float64)
    for t in range(t_count):
        c = _forward_step(p, traj.observations[t], h)
        caches.append(c)
        h = c["h"] if not traj.terminals[t] else np.zeros(p.hidden_dim)

    values = np.array([c["value"] for c in caches])
    if getattr(cfg, "use_gae", False):
        adv = gae_advantages(traj, values, cfg.gamma, cfg.gae_lambda)
    else:
        adv = returns - values

    g = p.zeros_like()
    hg = p.hidden_dim
    dh_next = np.zeros(hg)
    policy_loss = value_loss = entropy_sum = 0.0
    inv_t = 1.0 / t_count
    for t in range(t_count - 1, -1, -1):
        c = caches[t]
        probs = softmax(c["logits"])
        logp = np.log(probs)
        entropy = -float(probs @ logp)
        policy_loss += -logp[traj.actions[t]] * adv[t]
        entropy_sum += entropy

        verr = values[t] - returns[t]
        if use_clip:
            # critic moves at most clip_range from its rollout-time output;
            # the worse of clipped/unclipped squared error is penalized
            v_old = traj.values[t]
            v_cl = v_old + min(clip_range, max(-clip_range, values[t] - v_old))
            if verr * verr >= (v_cl - returns[t]) ** 2:
                value_term, dv = verr * verr, 2.0 * verr
            else:
                value_term = (v_cl - returns[t]) ** 2
                dv = 2.0 * (v_cl - returns[t]) if abs(values[t] - v_old) < clip_range else 0.0
        else:
            value_term, dv = verr * verr, 2.0 * verr
        value_loss += value_term

        # heads
        dlogits = probs.copy()
        dlogits[traj.actions[t]] -= 1.0
        dlogits *= adv[t] * inv_t
        dlogits += beta * probs * (logp + entropy) * inv_t  # -beta*H term
        dvalue = value_coef * dv * inv_t
        g.w_actor += np.outer(dlogits, c["h"])
        g.b_actor += dlogits
        g.w_critic += dvalue * c["h"][None, :]
        g.b_critic += np.array([dvalue])

        dh = p.w_actor.T @ dlogits + dvalue * p.w_critic[0]
        if not traj.terminals[t]:
            dh += dh_next

        # GRU cell
        r, z, n, h_prev = c["r"], c["z"], c["n"], c["h_prev"]
        dz = dh * (h_prev - n)
        dn = dh * (1.0 - z)
        da_n = dn * (1.0 - n * n)
        dr = da_n * c["gh_n"]
        da_r = dr * r * (1.0 - r)
        da_z = dz * z * (1.0 - z)
        dgi = np.concatenate([da_r, da_z, da_n])
        dgh = np.concatenate([da_r, da_z, da_n * r])
        g.w_ih += np.outer(dgi, c["z2"])
        g.b_ih += dgi
        g.w_hh += np.outer(dgh, h_prev)
        g.b_hh += dgh
        dh_next = dh * z + p.w_hh.T @ dgh

        # FC trunk
        dz2 = p.w_ih.T @ dgi
        da2 = dz2 * (c["a2"] > 0.0)
        g.w2 += np.outer(da2, c["z1"])
        g.b2 += da2
        da1 = (p.w2.T @ da2) * (c["a1"] > 0.0)
        g.w1 += np.outer(da1, c["x"])
        g.b1 += da1

    policy_loss *= inv_t
    value_loss *= inv_t
    entropy_mean = entropy_sum * inv_t
    total = policy_loss + value_coef * value_loss - beta * entropy_mean

    norm_sq = sum(float((a * a).sum()) for _, a in g.arrays())
    report = {
        "loss": float(total),
        "policy_loss": float(policy_loss),
        "value_loss": float(value_loss),
        "entropy": float(entropy_mean),
        "grad_norm": math.sqrt(norm_sq),
        "steps": t_count,
    }
    if not (math.isfinite(total) and math.isfinite(norm_sq)):
        raise NonFiniteLoss("non-finite loss or gradient", report)

    max_norm = getattr(cfg, "max_gradient_norm", 0.0)
    if max_norm > 0.0 and report["grad_norm"] > max_norm:
        scale = max_norm / report["grad_norm"]
        for _, a in g.arrays():
            a *= scale
        report["clipped"] = True
    else:
        report["clipped"] = False
    return g, report
