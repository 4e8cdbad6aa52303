"""Training and evaluation of the three controllers on one scenario."""
from __future__ import annotations

from dataclasses import dataclass
import csv

import numpy as np

from .baselines.centralized import CentralizedTask, centralized_rollout
from .baselines.mpc import run_mpc
from .config import Scenario
from .env import Trace, metrics, rollout
from .rl.ddpg import DDPGAgent, DDPGConfig, LearningCurve, train
from .rl.tasks import AbstractTask, abstract_policy

METHODS = ("MPC", "Proposed", "Centralized")


def _sampler(sc: Scenario, fleet):
    return lambda start, rng: sc.initial_state(fleet, start, rng)


def train_proposed(sc: Scenario, seed: int | None = None, cfg: DDPGConfig | None = None):
    env = sc.build_env()
    starts, _ = sc.windows(env)
    task = AbstractTask(env, starts, _sampler(sc, env.fleet))
    return train(task, cfg or sc.ddpg, sc.seed if seed is None else seed)


def train_centralized(sc: Scenario, seed: int | None = None, cfg: DDPGConfig | None = None):
    env = sc.build_env()
    starts, _ = sc.windows(env)
    task = CentralizedTask(env, starts, _sampler(sc, env.fleet))
    return train(task, cfg or sc.ddpg, sc.seed if seed is None else seed)


def eval_initial_state(sc: Scenario, fleet) -> np.ndarray:
    """Initial temperatures for evaluation; fixed by the scenario seed."""
    _, ev = sc.windows(sc.build_env())
    return sc.initial_state(fleet, ev, np.random.default_rng([sc.seed, 1]))


@dataclass
class Evaluation:
    traces: dict

    def table(self) -> list[tuple[str, float, float]]:
        return [(m, *metrics(self.traces[m])) for m in METHODS if m in self.traces]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "ATD", "TEC"])
            for m, atd, tec in self.table():
                w.writerow([m, repr(atd), repr(tec)])


def evaluate(sc: Scenario, proposed: DDPGAgent | None = None,
             centralized: DDPGAgent | None = None, mpc: bool = True) -> Evaluation:
    """Roll every available controller over the evaluation window."""
    env = sc.build_env()
    _, ev = sc.windows(env)
    x0 = eval_initial_state(sc, env.fleet)
    traces: dict[str, Trace] = {}
    if mpc:
        traces["MPC"] = run_mpc(env, x0, ev, sc.mpc.window)
    if proposed is not None:
        traces["Proposed"] = rollout(env, abstract_policy(proposed), x0, ev)
    if centralized is not None:
        traces["Centralized"] = centralized_rollout(env, centralized, x0, ev)
    return Evaluation(traces)


def convergence_episode(curve: LearningCurve | np.ndarray, tol: float = 0.05,
                        window: int = 5, tail: float = 0.2) -> int:
    """First episode from which the smoothed reward stays within ``tol`` of the plateau.

    The plateau is the mean reward over the last ``tail`` fraction of
    episodes; smoothing is a trailing mean over ``window`` episodes.
    """
    r = np.asarray(curve.reward if isinstance(curve, LearningCurve) else curve, dtype=float)
    if r.size == 0:
        raise ValueError("empty learning curve")
    n_tail = max(1, int(round(tail * r.size)))
    plateau = r[-n_tail:].mean()
    kernel = np.ones(window)
    sums = np.convolve(r, kernel)[: r.size]
    counts = np.convolve(np.ones_like(r), kernel)[: r.size]
    smooth = sums / counts
    outside = np.abs(smooth - plateau) > tol * abs(plateau)
    idx = np.flatnonzero(outside)
    return 0 if idx.size == 0 else int(idx[-1] + 1)
