"""Adapters exposing environments to the training loop."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..env import LaxityEnv, metrics

X0Sampler = Callable[[int, np.random.Generator], np.ndarray]


class EpisodeTask:
    """Shared episode bookkeeping: random start window and initial temperatures."""

    def __init__(self, env: LaxityEnv, starts: Sequence[int], x0_sampler: X0Sampler):
        if not len(starts):
            raise ValueError("need at least one start window")
        self.env = env
        self.starts = list(starts)
        self.x0_sampler = x0_sampler

    def _reset_env(self, rng: np.random.Generator):
        start = self.starts[int(rng.integers(len(self.starts)))]
        return self.env.reset(self.x0_sampler(start, rng), start)

    def episode_metrics(self) -> tuple[float, float]:
        return metrics(self.env.trace())


class AbstractTask(EpisodeTask):
    """Observe ``(c, L)``, choose total power; LLF spreads it over the fleet."""

    obs_dim = 2

    @property
    def act_lo(self):
        return np.array([self.env.P_lo])

    @property
    def act_hi(self):
        return np.array([self.env.P_hi])

    def reset(self, rng):
        return self._reset_env(rng).as_array()

    def step(self, action):
        obs, r, done, _ = self.env.step(float(np.asarray(action).reshape(-1)[0]))
        return obs.as_array(), r, done


def abstract_policy(agent) -> Callable:
    """Wrap an agent trained on :class:`AbstractTask` for :func:`laxhvac.env.rollout`."""
    return lambda obs: float(agent.act(obs.as_array())[0])
