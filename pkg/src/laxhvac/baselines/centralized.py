"""Centralized actor-critic baseline acting on every unit's power directly.

It reuses the deterministic policy gradient agent; only the observation,
action and reward differ from the aggregate controller.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..env import LaxityEnv, Trace
from ..rl.ddpg import DDPGAgent, DDPGConfig, LearningCurve, train
from ..rl.tasks import EpisodeTask, X0Sampler


class CentralizedTask(EpisodeTask):
    """Full-state task.

    Observation: ``[x_1 .. x_N, x_out, c]``. Action: per-unit power in
    ``[-u_max, u_max]``. Reward: ``-(temp_weight * sum|x' - target| + beta * c * sum|u|) / N``;
    dividing by the fleet size keeps critic targets at a fleet-independent scale.
    """

    def __init__(self, env: LaxityEnv, starts: Sequence[int], x0_sampler: X0Sampler,
                 temp_weight: float = 1.0, beta: float | None = None):
        super().__init__(env, starts, x0_sampler)
        self.temp_weight = temp_weight
        self.beta = env.reward_cfg.beta if beta is None else beta
        self.obs_dim = env.fleet.n_units + 2

    @property
    def act_lo(self):
        return -self.env.fleet.u_max

    @property
    def act_hi(self):
        return self.env.fleet.u_max.copy()

    def _obs(self):
        s = self.env.state
        return np.concatenate([s.x, [s.x_out, s.price]])

    def reset(self, rng):
        self._reset_env(rng)
        return self._obs()

    def step(self, action):
        s = self.env.state
        t, price = s.t, s.price
        _, _, done, info = self.env.step_units(np.asarray(action, dtype=float))
        dev = np.abs(self.env.state.x - self.env.fleet.targets(t)).sum()
        r = -(self.temp_weight * dev + self.beta * price * info["P"]) / self.env.fleet.n_units
        return self._obs(), float(r), done


def centralized_agent(env: LaxityEnv, cfg: DDPGConfig, starts: Sequence[int],
                      x0_sampler: X0Sampler, seed: int = 0,
                      temp_weight: float = 1.0) -> tuple[DDPGAgent, LearningCurve]:
    """Train the centralized baseline; returns the agent and its learning curve."""
    task = CentralizedTask(env, starts, x0_sampler, temp_weight)
    return train(task, cfg, seed)


def centralized_rollout(env: LaxityEnv, agent: DDPGAgent, x0, start: int = 0) -> Trace:
    env.reset(x0, start)
    while not env.done:
        s = env.state
        env.step_units(agent.act(np.concatenate([s.x, [s.x_out, s.price]])))
    return env.trace()
