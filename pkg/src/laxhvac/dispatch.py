"""Least-laxity-first power dispatch and schedule feasibility."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .laxity import LAXITY_INF, Request, min_time
from .thermal import ZoneParams, power_to_reach, step_zone

BUDGET_TOL = 1e-9


def llf_dispatch(P, laxity, x, x_target, u_max, active=None, demand=None) -> np.ndarray:
    """Split the total power ``P`` over units, least laxity first.

    Each selected unit gets ``min(u_max, P - B, demand)`` where ``B`` is the
    power already handed out and ``demand`` (default ``u_max``) is the most
    the unit can use this step without overshooting its target. The sign
    heats units below target and cools units above it. Units sitting exactly
    at target, units whose request has not started yet (sentinel laxity) and
    units masked out by ``active`` are never selected. Ties go to the lowest
    index.
    """
    laxity = np.asarray(laxity, dtype=float)
    x = np.asarray(x, dtype=float)
    x_target = np.broadcast_to(np.asarray(x_target, dtype=float), laxity.shape)
    u_max = np.broadcast_to(np.asarray(u_max, dtype=float), laxity.shape)
    cap = u_max if demand is None else np.minimum(u_max, np.abs(np.asarray(demand, dtype=float)))
    if P < 0:
        raise ValueError(f"total power must be >= 0, got {P}")
    u = np.zeros(laxity.shape)
    eligible = (x != x_target) & (laxity < LAXITY_INF)
    if active is not None:
        eligible &= np.asarray(active, dtype=bool)
    budget = 0.0
    for k in np.argsort(laxity, kind="stable"):
        if budget >= P:
            break
        if not eligible[k] or cap[k] <= 0:
            continue
        mag = min(cap[k], P - budget)
        u[k] = mag if x[k] < x_target[k] else -mag
        # land exactly on P so rounding never leaks a sliver to the next unit
        budget = P if mag == P - budget else budget + mag
    return u


@dataclass
class PowerSchedule:
    """Total power per step and the per-unit powers recovered from it.

    ``per_unit`` has shape ``(T, N)`` and is signed.
    """

    total: np.ndarray
    per_unit: np.ndarray

    def __post_init__(self):
        self.total = np.asarray(self.total, dtype=float)
        self.per_unit = np.asarray(self.per_unit, dtype=float)
        if self.per_unit.ndim != 2 or self.per_unit.shape[0] != self.total.shape[0]:
            raise ValueError("per_unit must be (T, N) aligned with total")

    @property
    def horizon(self) -> int:
        return len(self.total)


class FleetSimulator(Protocol):
    """Forward model used by :func:`check_feasible` and :func:`recover_schedule`.

    A state is whatever the simulator needs; the feasibility check only
    queries remaining minimum times and signs through this interface.
    """

    n_units: int
    u_max: np.ndarray

    def initial_state(self): ...

    def min_times(self, state, t: int) -> np.ndarray: ...

    def dispatch_inputs(self, state, t: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(x, x_target)`` used by LLF to choose heating or cooling."""

    def demands(self, state, t: int) -> np.ndarray:
        """Largest useful power magnitude per unit for this step."""

    def advance(self, state, u: np.ndarray, t: int): ...


class AbstractFleet:
    """Idealized units whose remaining work drops by ``|u| / u_max`` per step.

    This is the setting of the two-request toy example: serving a unit at
    full power removes one timestep of work and idle units do not drift.
    """

    def __init__(self, work, u_max):
        self.work0 = np.asarray(work, dtype=float)
        self.n_units = len(self.work0)
        self.u_max = np.broadcast_to(np.asarray(u_max, dtype=float), self.work0.shape).copy()

    def initial_state(self):
        return self.work0.copy()

    def min_times(self, state, t):
        return state.copy()

    def dispatch_inputs(self, state, t):
        # heating direction; "at target" means no work left
        return -state, np.zeros_like(state)

    def demands(self, state, t):
        return state * self.u_max

    def advance(self, state, u, t):
        return np.maximum(state - np.abs(u) / self.u_max, 0.0)


class ThermalFleet:
    """Single-zone units driven by a known outdoor temperature.

    ``x_out`` is a scalar or a per-step series; past its end the last value
    is held.
    """

    def __init__(self, params: Sequence[ZoneParams], x0, x_out):
        self.params = list(params)
        self.n_units = len(self.params)
        self.x0 = np.asarray(x0, dtype=float)
        self.x_out = np.atleast_1d(np.asarray(x_out, dtype=float))
        self.u_max = np.array([p.u_max for p in self.params])

    def initial_state(self):
        return self.x0.copy()

    def _x_out(self, t):
        return self.x_out[min(t, len(self.x_out) - 1)]

    def min_times(self, state, t):
        xo = self._x_out(t)
        return np.array([min_time(x, xo, p) for x, p in zip(state, self.params)])

    def dispatch_inputs(self, state, t):
        return state.copy(), np.array([p.x_target for p in self.params])

    def demands(self, state, t):
        xo = self._x_out(t)
        return np.array([power_to_reach(x, p.x_target, xo, p) for x, p in zip(state, self.params)])

    def advance(self, state, u, t):
        xo = self._x_out(t)
        return np.array([step_zone(x, ui, xo, p) for x, ui, p in zip(state, u, self.params)])


@dataclass
class Violation:
    condition: str  # "budget", "bounds", "unit_power" or "deadline"
    t: int
    unit: int | None = None
    value: float | None = None

    def __str__(self):
        where = f" unit {self.unit}" if self.unit is not None else ""
        val = f" ({self.value:g})" if self.value is not None else ""
        return f"{self.condition} violated at t={self.t}{where}{val}"


@dataclass
class FeasibilityReport:
    feasible: bool
    violation: Violation | None = None
    laxity: np.ndarray | None = None  # (T+1, N) deadline laxities along the run
    work: np.ndarray | None = None  # (T+1, N) remaining minimum times
    remaining: np.ndarray | None = None  # (T+1, N) time left to the deadline

    def __bool__(self):
        return self.feasible


def check_feasible(schedule: PowerSchedule, requests: Sequence[Request],
                   simulator: FleetSimulator, P_lo: float = 0.0, P_hi: float = np.inf,
                   tol: float = 1e-9) -> FeasibilityReport:
    """Forward-simulate ``schedule`` and test the three feasibility conditions.

    Conditions: per-step budget ``sum |u_i| <= P``, bounds ``P_lo <= P <= P_hi``
    (and ``|u_i| <= u_max``), and every request's remaining minimum time hits
    zero no later than its deadline. A missed deadline is reported at the
    first step its laxity went negative, or at the deadline itself.
    """
    T = schedule.horizon
    N = simulator.n_units
    if schedule.per_unit.shape[1] != N or len(requests) != N:
        raise ValueError("schedule, requests and simulator disagree on fleet size")
    state = simulator.initial_state()
    lax_hist = np.full((T + 1, N), np.nan)
    work_hist = np.full((T + 1, N), np.nan)
    rem_hist = np.full((T + 1, N), np.nan)
    done = np.zeros(N, dtype=bool)
    first_negative: dict[int, tuple[int, float]] = {}
    violations: list[Violation] = []

    def observe(t, state):
        e = simulator.min_times(state, t)
        work_hist[t] = e
        for i, req in enumerate(requests):
            if t < req.t_start:
                lax_hist[t, i] = LAXITY_INF
                continue
            if not done[i] and e[i] <= tol and t <= req.t_end:
                done[i] = True
            # a finished request cannot be late
            rem = max(req.t_end - t, 0) if done[i] else req.t_end - t
            rem_hist[t, i] = rem
            lax_hist[t, i] = rem - e[i]
            if not done[i] and lax_hist[t, i] < -tol and i not in first_negative:
                first_negative[i] = (t, lax_hist[t, i])

    for t in range(T):
        observe(t, state)
        P = schedule.total[t]
        u = schedule.per_unit[t]
        if not (P_lo - tol <= P <= P_hi + tol):
            violations.append(Violation("bounds", t, None, float(P)))
        used = np.abs(u).sum()
        if used > P + BUDGET_TOL:
            violations.append(Violation("budget", t, None, float(used)))
        over = np.flatnonzero(np.abs(u) > simulator.u_max * (1 + 1e-12))
        if over.size:
            violations.append(Violation("unit_power", t, int(over[0]), float(u[over[0]])))
        state = simulator.advance(state, u, t)
    observe(T, state)

    for i, req in enumerate(requests):
        if done[i] or req.t_end > T:
            continue
        t_bad, val = first_negative.get(i, (req.t_end, lax_hist[req.t_end, i]))
        violations.append(Violation("deadline", t_bad, i, float(val)))

    order = {"bounds": 0, "budget": 1, "unit_power": 2, "deadline": 3}
    violations.sort(key=lambda v: (v.t, order[v.condition], -1 if v.unit is None else v.unit))
    return FeasibilityReport(not violations, violations[0] if violations else None,
                             lax_hist, work_hist, rem_hist)


def recover_schedule(total, requests: Sequence[Request], simulator: FleetSimulator,
                     fixed: dict[int, Sequence[float]] | None = None) -> PowerSchedule:
    """Roll a total power schedule forward, dispatching each step with LLF.

    ``fixed`` maps a step index to a per-unit power vector that replaces the
    LLF choice at that step (used to replay deviations from the rule).
    """
    total = np.asarray(total, dtype=float)
    fixed = fixed or {}
    state = simulator.initial_state()
    per_unit = np.zeros((len(total), simulator.n_units))
    for t, P in enumerate(total):
        if t in fixed:
            u = np.asarray(fixed[t], dtype=float)
        else:
            e = simulator.min_times(state, t)
            lax = np.array([LAXITY_INF if t < r.t_start else (r.t_end - t) - e[i]
                            for i, r in enumerate(requests)])
            x, x_target = simulator.dispatch_inputs(state, t)
            u = llf_dispatch(P, lax, x, x_target, simulator.u_max,
                             demand=simulator.demands(state, t))
        per_unit[t] = u
        state = simulator.advance(state, u, t)
    return PowerSchedule(total, per_unit)
