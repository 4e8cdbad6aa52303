"""Fleet MDP: LLF aggregation, abstract state, reward and episode metrics."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .dispatch import llf_dispatch
from .laxity import LAXITY_INF, DurationConfig, Request, constraint_laxity, should_renew
from .thermal import BuildingParams, ZoneParams, power_to_reach, step_building, step_zone

Site = Union[ZoneParams, BuildingParams]
EPISODE_LENGTH = 96


@dataclass(frozen=True)
class RewardConfig:
    """Weights of the laxity and energy-cost reward terms, and the discount."""

    alpha: float = 0.05
    beta: float = 1.0
    gamma: float = 0.95

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or not self.alpha + self.beta > 0:
            raise ValueError("need alpha, beta >= 0 and alpha + beta > 0")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")


@dataclass(frozen=True)
class TargetSchedule:
    """Piecewise-constant target temperature over the hours of a week.

    ``breakpoints`` are ``(hour_of_week, target)`` pairs; the first must start
    at hour 0. ``start_hour`` is the hour of week at episode step 0.
    """

    breakpoints: tuple[tuple[float, float], ...]
    start_hour: float = 0.0

    def __post_init__(self):
        bps = tuple(sorted((float(h), float(v)) for h, v in self.breakpoints))
        if not bps or bps[0][0] != 0.0:
            raise ValueError("target schedule must start at hour 0")
        if bps[-1][0] >= 168:
            raise ValueError("schedule hours must lie in [0, 168)")
        object.__setattr__(self, "breakpoints", bps)

    def at(self, t: int, dt: float = 1.0) -> float:
        how = (self.start_hour + t * dt) % 168.0
        value = self.breakpoints[0][1]
        for h, v in self.breakpoints:
            if h <= how:
                value = v
        return value


class Fleet:
    """A set of single-zone units and multi-zone buildings, flattened to units."""

    def __init__(self, sites: Sequence[Site], schedule: TargetSchedule | None = None):
        self.sites = list(sites)
        if not self.sites:
            raise ValueError("fleet is empty")
        self.schedule = schedule
        self.slices = []
        start = 0
        for s in self.sites:
            n = s.n_zones if isinstance(s, BuildingParams) else 1
            self.slices.append(slice(start, start + n))
            start += n
        self.n_units = start
        dts = {s.dt for s in self.sites}
        if len(dts) != 1:
            raise ValueError("all sites must share one timestep")
        self.dt = dts.pop()
        self._base = []
        for s in self.sites:
            if isinstance(s, BuildingParams):
                self._base.extend(s.zones)
            else:
                self._base.append(s)
        self.u_max = np.array([z.u_max for z in self._base])
        self.base_targets = np.array([z.x_target for z in self._base])

    def targets(self, t: int) -> np.ndarray:
        if self.schedule is None:
            return self.base_targets.copy()
        return np.full(self.n_units, self.schedule.at(t, self.dt))

    def unit_models(self, x, x_out: float, t: int) -> list[tuple[ZoneParams, float]]:
        """Per-unit single-zone surrogate and the ambient temperature it sees."""
        out = []
        for s, sl in zip(self.sites, self.slices):
            if isinstance(s, BuildingParams):
                xs = x[sl]
                out.extend(s.effective_zone(i, xs, x_out) for i in range(s.n_zones))
            else:
                out.append((s, x_out))
        if self.schedule is not None:
            target = self.schedule.at(t, self.dt)
            out = [(p.with_target(target), amb) for p, amb in out]
        return out

    def step(self, x, u, x_out: float) -> np.ndarray:
        x_new = np.empty(self.n_units)
        for s, sl in zip(self.sites, self.slices):
            if isinstance(s, BuildingParams):
                x_new[sl] = step_building(x[sl], u[sl], x_out, s)
            else:
                x_new[sl.start] = step_zone(float(x[sl.start]), float(u[sl.start]), x_out, s)
        return x_new


@dataclass
class FleetState:
    x: np.ndarray
    requests: tuple[Request, ...]
    price: float
    x_out: float
    t: int

    @property
    def laxity(self) -> np.ndarray:
        return np.array([r.laxity for r in self.requests])


@dataclass(frozen=True)
class AbstractState:
    price: float
    L: float

    def as_array(self) -> np.ndarray:
        return np.array([self.price, self.L])


def aggregate_laxity(laxities) -> float:
    """Sum of laxities, leaving out requests that have not started."""
    lax = np.asarray(laxities, dtype=float)
    return float(np.sum(lax[lax < LAXITY_INF]))


def abstract(s: FleetState) -> AbstractState:
    # sorting makes the floating-point sum independent of unit order
    return AbstractState(float(s.price), aggregate_laxity(np.sort(s.laxity)))


def reward(s: FleetState, P: float, cfg: RewardConfig) -> float:
    """``alpha * L - beta * c * P``; depends on ``s`` only through its abstraction."""
    a = abstract(s)
    return cfg.alpha * a.L - cfg.beta * a.price * P


def refresh_requests(fleet: Fleet, x, requests, x_out: float, t: int) -> tuple[Request, ...]:
    out = []
    for req, xi, (p, amb) in zip(requests, x, fleet.unit_models(x, x_out, t)):
        lax, tau, e = constraint_laxity(req, t, float(xi), amb, p)
        out.append(replace(req, laxity=lax, penalty=tau, min_time=e))
    return tuple(out)


def unit_demands(fleet: Fleet, x, x_out: float, t: int) -> np.ndarray:
    return np.array([power_to_reach(float(xi), p.x_target, amb, p)
                     for xi, (p, amb) in zip(x, fleet.unit_models(x, x_out, t))])


def env_step(s: FleetState, P: float, exog: tuple[float, float], fleet: Fleet,
             duration: DurationConfig, cfg: RewardConfig, P_lo: float, P_hi: float,
             per_unit=None):
    """One MDP transition.

    Clamps ``P``, dispatches it with LLF (or applies ``per_unit`` powers
    directly), advances the thermal state, refreshes and renews requests
    and scores the pre-transition state. ``exog`` is ``(price, x_out)`` at
    the next step.
    """
    if per_unit is None:
        P_applied = float(np.clip(P, P_lo, P_hi))
        targets = fleet.targets(s.t)
        u = llf_dispatch(P_applied, s.laxity, s.x, targets, fleet.u_max,
                         demand=unit_demands(fleet, s.x, s.x_out, s.t))
    else:
        u = np.asarray(per_unit, dtype=float)
        if u.shape != (fleet.n_units,):
            raise ValueError(f"expected {fleet.n_units} unit powers")
        u = np.clip(u, -fleet.u_max, fleet.u_max)
        P_applied = float(np.abs(u).sum())
    r = reward(s, P_applied, cfg)

    x_new = fleet.step(s.x, u, s.x_out)
    t_new = s.t + 1
    c_new, x_out_new = exog
    old_targets, new_targets = fleet.targets(s.t), fleet.targets(t_new)
    requests = []
    for i, req in enumerate(s.requests):
        retarget = old_targets[i] != new_targets[i]
        if retarget or should_renew(req, t_new, s.x[i], x_new[i], new_targets[i]):
            req = Request(unit_id=req.unit_id, t_start=t_new, t_end=t_new + duration.duration)
        requests.append(req)
    requests = refresh_requests(fleet, x_new, requests, x_out_new, t_new)
    s_new = FleetState(x_new, requests, float(c_new), float(x_out_new), t_new)
    info = {"u": u, "P": P_applied, "x_prev": s.x, "laxity_prev": s.laxity,
            "targets": fleet.targets(s.t)}
    return s_new, r, info


@dataclass
class Trace:
    """Per-step record of one episode.

    Row ``t`` holds the exogenous inputs and decisions at step ``t``, the
    laxities the dispatch saw, and the temperatures at the end of the step.
    """

    price: np.ndarray
    x_out: np.ndarray
    P: np.ndarray
    x: np.ndarray  # (T, N)
    u: np.ndarray  # (T, N)
    laxity: np.ndarray  # (T, N)
    targets: np.ndarray  # (T, N)
    rewards: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dt: float = 1.0

    def __len__(self):
        return len(self.P)

    def to_csv(self, path):
        N = self.x.shape[1]
        header = (["t", "c", "x_out", "P"] + [f"x_{i}" for i in range(N)]
                  + [f"u_{i}" for i in range(N)] + [f"l_{i}" for i in range(N)]
                  + [f"target_{i}" for i in range(N)])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t in range(len(self)):
                row = [t, self.price[t], self.x_out[t], self.P[t], *self.x[t], *self.u[t],
                       *self.laxity[t], *self.targets[t]]
                w.writerow([repr(float(v)) if not isinstance(v, int) else v for v in row])

    @classmethod
    def from_csv(cls, path, dt: float = 1.0) -> "Trace":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        if body.size == 0:
            raise ValueError(f"{path}: empty trace")
        col = {name: k for k, name in enumerate(header)}
        N = sum(1 for h in header if h.startswith("x_") and h != "x_out")

        def block(prefix):
            return body[:, [col[f"{prefix}_{i}"] for i in range(N)]]

        return cls(body[:, col["c"]], body[:, col["x_out"]], body[:, col["P"]],
                   block("x"), block("u"), block("l"), block("target"), dt=dt)


def metrics(trace: Trace) -> tuple[float, float]:
    """Average temperature deviation (degC) and total energy cost.

    Energy is what the units actually drew, ``sum_i |u_i| * dt``, priced at
    the step's tariff.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    atd = float(np.mean(np.abs(trace.x - trace.targets)))
    tec = float(np.sum(trace.price * np.abs(trace.u).sum(axis=1) * trace.dt))
    return atd, tec


class LaxityEnv:
    """Episodic environment seen by the aggregate controller.

    Observations are :class:`AbstractState` objects; actions are total power.
    """

    def __init__(self, fleet: Fleet, price, x_out, reward_cfg: RewardConfig = RewardConfig(),
                 duration: DurationConfig = DurationConfig(),
                 episode_length: int = EPISODE_LENGTH, P_lo: float = 0.0,
                 P_hi: float | None = None):
        self.fleet = fleet
        self.price = np.asarray(price, dtype=float)
        self.x_out = np.asarray(x_out, dtype=float)
        if self.price.shape != self.x_out.shape:
            raise ValueError("price and x_out series differ in length")
        if episode_length < 1:
            raise ValueError("episode_length must be >= 1")
        if len(self.price) < episode_length + 1:
            raise ValueError(f"need {episode_length + 1} exogenous points, have {len(self.price)}")
        self.reward_cfg = reward_cfg
        self.duration = duration
        self.episode_length = episode_length
        self.P_lo = P_lo
        self.P_hi = float(fleet.u_max.sum()) if P_hi is None else P_hi
        self.state: FleetState | None = None
        self.start = 0
        self._log: dict[str, list] = {}

    @property
    def n_windows(self) -> int:
        return len(self.price) - self.episode_length

    def reset(self, x0, start: int = 0) -> AbstractState:
        if not 0 <= start < self.n_windows:
            raise ValueError(f"start {start} outside [0, {self.n_windows})")
        self.start = start
        x0 = np.asarray(x0, dtype=float).copy()
        reqs = [Request(unit_id=i, t_start=0, t_end=self.duration.duration)
                for i in range(self.fleet.n_units)]
        reqs = refresh_requests(self.fleet, x0, reqs, self.x_out[start], 0)
        self.state = FleetState(x0, reqs, float(self.price[start]), float(self.x_out[start]), 0)
        self._log = {k: [] for k in ("price", "x_out", "P", "x", "u", "laxity", "targets", "r")}
        return abstract(self.state)

    @property
    def done(self) -> bool:
        return self.state is not None and self.state.t >= self.episode_length

    def _advance(self, P, per_unit=None):
        if self.state is None:
            raise RuntimeError("call reset() first")
        if self.done:
            raise RuntimeError(f"episode is over after {self.episode_length} steps")
        s = self.state
        k = self.start + s.t + 1
        s_new, r, info = env_step(s, P, (self.price[k], self.x_out[k]), self.fleet,
                                  self.duration, self.reward_cfg, self.P_lo, self.P_hi,
                                  per_unit=per_unit)
        log = self._log
        log["price"].append(s.price)
        log["x_out"].append(s.x_out)
        log["P"].append(info["P"])
        log["x"].append(s_new.x)
        log["u"].append(info["u"])
        log["laxity"].append(np.where(s.laxity < LAXITY_INF, s.laxity, np.nan))
        log["targets"].append(info["targets"])
        log["r"].append(r)
        self.state = s_new
        info["state"] = s_new
        return abstract(s_new), r, self.done, info

    def step(self, P: float):
        """Dispatch total power ``P`` with LLF; returns ``(obs, reward, done, info)``."""
        return self._advance(P)

    def step_units(self, u):
        """Apply per-unit powers directly (baselines); total power is ``sum |u|``."""
        return self._advance(None, per_unit=u)

    def trace(self) -> Trace:
        log = self._log
        return Trace(np.array(log["price"]), np.array(log["x_out"]), np.array(log["P"]),
                     np.array(log["x"]).reshape(-1, self.fleet.n_units),
                     np.array(log["u"]).reshape(-1, self.fleet.n_units),
                     np.array(log["laxity"]).reshape(-1, self.fleet.n_units),
                     np.array(log["targets"]).reshape(-1, self.fleet.n_units),
                     np.array(log["r"]), dt=self.fleet.dt)


def rollout(env: LaxityEnv, policy, x0, start: int = 0) -> Trace:
    """Run one episode with ``policy(AbstractState) -> P``."""
    obs = env.reset(x0, start)
    while not env.done:
        obs, _, _, _ = env.step(policy(obs))
    return env.trace()
