"""Deterministic policy gradient agent (actor, critic, targets, replay)."""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
import logging

import numpy as np

from .nets import Adam, NetworkParameters, RunningNormalizer, backward, forward, soft_update

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class DDPGConfig:
    hidden: tuple[int, ...] = (64, 64)
    actor_lr: float = 1e-3
    critic_lr: float = 3e-3
    rho: float = 0.005
    gamma: float = 0.95
    noise_start: float = 0.3
    noise_end: float = 0.02
    buffer_size: int = 100_000
    batch_size: int = 128
    episodes: int = 400
    reward_scale: float = 1.0
    updates_per_step: int = 1
    preact_penalty: float = 0.01


class ReplayBuffer:
    """Fixed-capacity FIFO of ``(s, a, r, s')`` with uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        self.capacity = capacity
        self.s = np.zeros((capacity, obs_dim))
        self.a = np.zeros((capacity, act_dim))
        self.r = np.zeros(capacity)
        self.s2 = np.zeros((capacity, obs_dim))
        self.ptr = 0
        self.size = 0

    def add(self, s, a, r, s2):
        i = self.ptr
        self.s[i], self.a[i], self.r[i], self.s2[i] = s, a, r, s2
        self.ptr = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def __len__(self):
        return self.size

    def sample(self, n: int, rng: np.random.Generator):
        idx = rng.integers(0, self.size, size=n)
        return self.s[idx], self.a[idx], self.r[idx], self.s2[idx]


# -- actor ------------------------------------------------------------------

def actor_forward(p: NetworkParameters, s_norm, lo, hi):
    """Squash the network output into ``[lo, hi]``; returns action and cache."""
    z, acts = forward(p, s_norm)
    th = np.tanh(z)
    return lo + (hi - lo) * 0.5 * (th + 1.0), (acts, th)


def actor_backward(p: NetworkParameters, cache, grad_a, lo, hi):
    acts, th = cache
    return backward(p, acts, grad_a * (hi - lo) * 0.5 * (1.0 - th ** 2))


# -- critic -----------------------------------------------------------------

def _scale_action(a, lo, hi):
    return 2.0 * (a - lo) / (hi - lo) - 1.0


def critic_forward(p: NetworkParameters, s_norm, a, lo, hi):
    x = np.concatenate([s_norm, _scale_action(a, lo, hi)], axis=1)
    q, acts = forward(p, x)
    return q[:, 0], acts


def critic_action_grad(p: NetworkParameters, s_norm, a, lo, hi):
    """``Q`` values and ``dQ/da`` for each row."""
    q, acts = critic_forward(p, s_norm, a, lo, hi)
    _, gin = backward(p, acts, np.ones((len(q), 1)))
    obs_dim = s_norm.shape[1]
    return q, gin[:, obs_dim:] * 2.0 / (hi - lo)


def critic_loss(p: NetworkParameters, s_norm, a, y, lo, hi):
    """Mean squared TD error against fixed targets ``y`` and its gradient."""
    q, acts = critic_forward(p, s_norm, a, lo, hi)
    err = q - y
    loss = float(np.mean(err ** 2))
    grads, _ = backward(p, acts, (2.0 / len(err)) * err[:, None])
    return loss, grads


def td_targets(actor_t, critic_t, r, s2_norm, gamma, lo, hi):
    """``r + gamma * Q'(s', mu'(s'))`` from the target networks."""
    a2, _ = actor_forward(actor_t, s2_norm, lo, hi)
    q2, _ = critic_forward(critic_t, s2_norm, a2, lo, hi)
    return r + gamma * q2


def actor_objective(actor, critic, s_norm, lo, hi, preact_penalty: float = 0.0):
    """Batch mean of ``Q(s, mu(s))`` and its gradient w.r.t. the actor.

    ``preact_penalty`` subtracts ``penalty/2 * mean |z|^2`` where ``z`` is the
    actor output before squashing; it keeps ``tanh`` away from saturation,
    where the policy gradient would vanish.
    """
    a, (acts, th) = actor_forward(actor, s_norm, lo, hi)
    q, dq_da = critic_action_grad(critic, s_norm, a, lo, hi)
    z = acts[-1]
    n = len(q)
    grad_z = (dq_da * (hi - lo) * 0.5 * (1.0 - th ** 2) - preact_penalty * z) / n
    grads, _ = backward(actor, acts, grad_z)
    j = float(np.mean(q)) - 0.5 * preact_penalty * float(np.mean(np.sum(z ** 2, axis=1)))
    return j, grads


class DDPGAgent:
    """Actor-critic pair with target copies, optimizers and input normalizer."""

    def __init__(self, obs_dim: int, act_lo, act_hi, cfg: DDPGConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.lo = np.atleast_1d(np.asarray(act_lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(act_hi, dtype=float))
        if np.any(self.hi <= self.lo):
            raise ValueError("action upper bound must exceed lower bound")
        self.obs_dim = obs_dim
        self.act_dim = len(self.lo)
        self.actor = NetworkParameters.init([obs_dim, *cfg.hidden, self.act_dim], rng)
        self.critic = NetworkParameters.init([obs_dim + self.act_dim, *cfg.hidden, 1], rng)
        self.actor_t = self.actor.copy()
        self.critic_t = self.critic.copy()
        self.actor_opt = Adam(lr=cfg.actor_lr)
        self.critic_opt = Adam(lr=cfg.critic_lr)
        self.norm = RunningNormalizer(obs_dim)

    def act(self, obs) -> np.ndarray:
        a, _ = actor_forward(self.actor, self.norm(np.atleast_2d(obs)), self.lo, self.hi)
        return a[0]

    def update(self, batch) -> tuple[float, float]:
        s, a, r, s2 = batch
        sn, s2n = self.norm(s), self.norm(s2)
        y = td_targets(self.actor_t, self.critic_t, r * self.cfg.reward_scale, s2n,
                       self.cfg.gamma, self.lo, self.hi)
        loss, g = critic_loss(self.critic, sn, a, y, self.lo, self.hi)
        self.critic_opt.step(self.critic, g)
        j, ga = actor_objective(self.actor, self.critic, sn, self.lo, self.hi,
                                self.cfg.preact_penalty)
        self.actor_opt.step(self.actor, ga, ascent=True)
        soft_update(self.actor, self.actor_t, self.cfg.rho)
        soft_update(self.critic, self.critic_t, self.cfg.rho)
        return loss, j

    def save(self, path):
        arrays = {"version": np.array(CHECKPOINT_VERSION), "lo": self.lo, "hi": self.hi,
                  "hidden": np.array(self.cfg.hidden)}
        for name in ("actor", "critic", "actor_t", "critic_t"):
            for k, a in enumerate(getattr(self, name).arrays()):
                arrays[f"{name}_{k}"] = a
        for k, v in self.norm.state().items():
            arrays[f"norm_{k}"] = v
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path, cfg: DDPGConfig | None = None) -> "DDPGAgent":
        with np.load(path) as d:
            if int(d["version"]) != CHECKPOINT_VERSION:
                raise ValueError(f"{path}: unsupported checkpoint version {int(d['version'])}")
            cfg = cfg or DDPGConfig()
            cfg = DDPGConfig(**{**asdict(cfg), "hidden": tuple(int(h) for h in d["hidden"])})
            obs_dim = d["norm_mean"].shape[0]
            agent = cls(obs_dim, d["lo"], d["hi"], cfg, np.random.default_rng(0))
            for name in ("actor", "critic", "actor_t", "critic_t"):
                for k, a in enumerate(getattr(agent, name).arrays()):
                    a[...] = d[f"{name}_{k}"]
            agent.norm.load({k: d[f"norm_{k}"] for k in ("count", "mean", "var")})
        return agent


@dataclass
class LearningCurve:
    episode: list[int] = field(default_factory=list)
    reward: list[float] = field(default_factory=list)
    atd: list[float] = field(default_factory=list)
    tec: list[float] = field(default_factory=list)

    def append(self, ep, reward, atd, tec):
        self.episode.append(ep)
        self.reward.append(reward)
        self.atd.append(atd)
        self.tec.append(tec)

    def __len__(self):
        return len(self.episode)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["episode", "reward", "ATD", "TEC"])
            for row in zip(self.episode, self.reward, self.atd, self.tec):
                w.writerow([row[0], *(repr(float(v)) for v in row[1:])])

    @classmethod
    def from_csv(cls, path) -> "LearningCurve":
        c = cls()
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                c.append(int(row["episode"]), float(row["reward"]), float(row["ATD"]),
                         float(row["TEC"]))
        return c


def noise_scale(cfg: DDPGConfig, episode: int) -> float:
    """Linear decay from ``noise_start`` to ``noise_end`` over the run."""
    if cfg.episodes <= 1:
        return cfg.noise_end
    frac = min(episode / (cfg.episodes - 1), 1.0)
    return cfg.noise_start + frac * (cfg.noise_end - cfg.noise_start)


def train(task, cfg: DDPGConfig, seed: int = 0, agent: DDPGAgent | None = None,
          checkpoint_every: int = 0, checkpoint_path=None):
    """Train on ``task`` for ``cfg.episodes`` episodes.

    ``task`` provides ``obs_dim``, ``act_lo``, ``act_hi``, ``reset(rng)``,
    ``step(action) -> (obs, reward, done)`` and ``episode_metrics()``.
    Returns the agent and its per-episode learning curve.
    """
    rng = np.random.default_rng(seed)
    if agent is None:
        agent = DDPGAgent(task.obs_dim, task.act_lo, task.act_hi, cfg, rng)
    buf = ReplayBuffer(cfg.buffer_size, agent.obs_dim, agent.act_dim)
    curve = LearningCurve()
    half_range = 0.5 * (agent.hi - agent.lo)
    for ep in range(cfg.episodes):
        sigma = noise_scale(cfg, ep)
        obs = task.reset(rng)
        agent.norm.update(obs)
        total, done = 0.0, False
        while not done:
            a = agent.act(obs) + sigma * half_range * rng.standard_normal(agent.act_dim)
            a = np.clip(a, agent.lo, agent.hi)
            obs2, r, done = task.step(a)
            buf.add(obs, a, r, obs2)
            agent.norm.update(obs2)
            total += r
            obs = obs2
            if len(buf) >= cfg.batch_size:
                for _ in range(cfg.updates_per_step):
                    agent.update(buf.sample(cfg.batch_size, rng))
        atd, tec = task.episode_metrics()
        curve.append(ep, total, atd, tec)
        log.debug("episode %d reward %.3f ATD %.3f TEC %.3f", ep, total, atd, tec)
        if checkpoint_every and checkpoint_path and (ep + 1) % checkpoint_every == 0:
            agent.save(checkpoint_path)
    if not agent.actor.all_finite() or not agent.critic.all_finite():
        raise FloatingPointError("training diverged: non-finite network weights")
    return agent, curve
