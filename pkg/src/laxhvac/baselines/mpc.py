"""Full-information MPC baseline posed as a linear program."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import Fleet, LaxityEnv, Trace
from ..thermal import BuildingParams, ZoneParams, step_building
from .lp import LinearProgram
from .simplex import solve_lp

COMFORT_PENALTY = 1e3  # per degC-step outside the comfort band


def affine_step(site) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(M, N, q)`` with ``x' = M x + N u + q x_out`` for one site.

    Exact for the simulator: the single-zone map is closed form and the RK4
    building map is affine, so it is recovered by probing basis vectors.
    """
    if isinstance(site, ZoneParams):
        k = site.decay
        return np.array([[k]]), np.array([[(1 - k) * site.b / site.a]]), np.array([1 - k])
    n = site.n_zones
    zero = np.zeros(n)
    q = step_building(zero, zero, 1.0, site)
    M = np.column_stack([step_building(np.eye(n)[j], zero, 0.0, site) for j in range(n)])
    N = np.column_stack([step_building(zero, np.eye(n)[j] * site.zones[j].u_max, 0.0, site)
                         / site.zones[j].u_max for j in range(n)])
    return M, N, q


def comfort_bands(fleet: Fleet, T: int, t0: int = 0):
    """Per-step targets and comfort bands, shape ``(T, N)`` each."""
    zones = []
    for s in fleet.sites:
        zones.extend(s.zones if isinstance(s, BuildingParams) else [s])
    off_lo = np.array([z.x_lo - z.x_target for z in zones])
    off_hi = np.array([z.x_hi - z.x_target for z in zones])
    targets = np.array([fleet.targets(t0 + t) for t in range(T)])
    return targets, targets + off_lo, targets + off_hi


@dataclass
class _Index:
    N: int
    T: int

    def __call__(self, kind: int, t: int, i: int) -> int:
        return (kind * self.T + t) * self.N + i


H, G, X, P_IN, P_OUT, M_IN, M_OUT = range(7)
N_KINDS = 7
_TAGS = ("h", "g", "x", "pin", "pout", "min", "mout")


def build_mpc_lp(fleet: Fleet, x0, price, x_out, horizon: int, P_hi: float | None = None,
                 comfort_penalty: float = COMFORT_PENALTY, t0: int = 0) -> LinearProgram:
    """Tracking-plus-energy LP over ``horizon`` steps with exact discrete dynamics.

    Heating ``h`` and cooling ``g`` are separate nonnegative variables, so
    ``|u| = h + g`` at the optimum. The deviation ``x - target`` is split into
    above/below parts, each with an in-band piece (bounded by the comfort
    band, unit cost) and an out-of-band piece (cost ``1 + comfort_penalty``),
    which makes the band soft without extra rows. The total-power row is
    only emitted when ``P_hi`` can actually bind.
    """
    N, T = fleet.n_units, horizon
    price = np.asarray(price, dtype=float)[:T]
    x_out = np.asarray(x_out, dtype=float)[:T]
    if len(price) < T or len(x_out) < T:
        raise ValueError("exogenous series shorter than the horizon")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (N,):
        raise ValueError(f"expected {N} initial temperatures")
    idx = _Index(N, T)
    nv = N_KINDS * N * T
    c = np.zeros(nv)
    var_lo = np.zeros(nv)
    var_hi = np.full(nv, np.inf)
    u_max = fleet.u_max
    targets, band_lo, band_hi = comfort_bands(fleet, T, t0)
    names = [f"{tag}_{t}_{i}" for tag in _TAGS for t in range(T) for i in range(N)]
    for t in range(T):
        for i in range(N):
            for kind in (H, G):
                c[idx(kind, t, i)] = price[t] * fleet.dt
                var_hi[idx(kind, t, i)] = u_max[i]
            var_lo[idx(X, t, i)] = -np.inf
            var_hi[idx(P_IN, t, i)] = band_hi[t, i] - targets[t, i]
            var_hi[idx(M_IN, t, i)] = targets[t, i] - band_lo[t, i]
            c[idx(P_IN, t, i)] = c[idx(M_IN, t, i)] = 1.0
            c[idx(P_OUT, t, i)] = c[idx(M_OUT, t, i)] = 1.0 + comfort_penalty

    rows, cols, vals, lo, hi, rnames = [], [], [], [], [], []

    def add_row(entries, l, h, name):
        r = len(lo)
        for j, v in entries:
            rows.append(r)
            cols.append(j)
            vals.append(v)
        lo.append(l)
        hi.append(h)
        rnames.append(name)

    for site, sl in zip(fleet.sites, fleet.slices):
        M, Nm, q = affine_step(site)
        units = range(sl.start, sl.stop)
        for t in range(T):
            for a, i in enumerate(units):
                entries = [(idx(X, t, i), 1.0)]
                rhs = q[a] * x_out[t]
                for b, j in enumerate(units):
                    if t == 0:
                        rhs += M[a, b] * x0[j]
                    elif M[a, b] != 0.0:
                        entries.append((idx(X, t - 1, j), -M[a, b]))
                    if Nm[a, b] != 0.0:
                        entries.append((idx(H, t, j), -Nm[a, b]))
                        entries.append((idx(G, t, j), Nm[a, b]))
                add_row(entries, rhs, rhs, f"dyn_{t}_{i}")
    for t in range(T):
        for i in range(N):
            xr = targets[t, i]
            add_row([(idx(X, t, i), 1.0), (idx(P_IN, t, i), -1.0), (idx(P_OUT, t, i), -1.0),
                     (idx(M_IN, t, i), 1.0), (idx(M_OUT, t, i), 1.0)], xr, xr, f"dev_{t}_{i}")
    if P_hi is not None and P_hi < u_max.sum():
        for t in range(T):
            entries = [(idx(k, t, i), 1.0) for i in range(N) for k in (H, G)]
            add_row(entries, -np.inf, P_hi, f"total_{t}")
    return LinearProgram(c, rows, cols, vals, lo, hi, var_lo, var_hi,
                         var_names=names, row_names=rnames,
                         meta={"N": N, "T": T})


def unpack(lp: LinearProgram, x: np.ndarray):
    """Split an MPC solution into per-unit powers and temperatures, ``(T, N)``."""
    N, T = lp.meta["N"], lp.meta["T"]
    blocks = x.reshape(N_KINDS, T, N)
    return blocks[H] - blocks[G], blocks[X]


@dataclass
class MPCResult:
    u: np.ndarray  # (T, N)
    x: np.ndarray  # (T, N) end-of-step temperatures
    objective: float


def solve_mpc(fleet: Fleet, x0, price, x_out, horizon: int, P_hi: float | None = None,
              comfort_penalty: float = COMFORT_PENALTY, t0: int = 0) -> MPCResult:
    """Solve the open-loop MPC problem.

    Without a binding total-power row the sites are independent, so each
    site's LP is solved on its own and the results are stacked.
    """
    x0 = np.asarray(x0, dtype=float)
    binding = P_hi is not None and P_hi < fleet.u_max.sum()
    if binding or len(fleet.sites) == 1:
        lp = build_mpc_lp(fleet, x0, price, x_out, horizon, P_hi, comfort_penalty, t0)
        sol = solve_lp(lp)
        u, x = unpack(lp, sol.x)
        return MPCResult(u, x, sol.objective)
    us, xs, obj = [], [], 0.0
    for site, sl in zip(fleet.sites, fleet.slices):
        sub = Fleet([site], fleet.schedule)
        r = solve_mpc(sub, x0[sl], price, x_out, horizon, None, comfort_penalty, t0)
        us.append(r.u)
        xs.append(r.x)
        obj += r.objective
    return MPCResult(np.hstack(us), np.hstack(xs), obj)


def trace_cost(trace: Trace, fleet: Fleet, comfort_penalty: float = COMFORT_PENALTY,
               t0: int = 0) -> float:
    """The MPC objective evaluated on any controller's trace."""
    T = len(trace)
    _, band_lo, band_hi = comfort_bands(fleet, T, t0)
    energy = np.sum(trace.price * np.abs(trace.u).sum(axis=1) * trace.dt)
    dev = np.sum(np.abs(trace.x - trace.targets))
    viol = np.sum(np.maximum(band_lo - trace.x, 0) + np.maximum(trace.x - band_hi, 0))
    return float(energy + dev + comfort_penalty * viol)


def run_mpc(env: LaxityEnv, x0, start: int = 0, window: int | None = None) -> Trace:
    """Roll out MPC in ``env`` and return its trace.

    ``window=None`` solves once over the whole episode with perfect
    foresight; otherwise a receding-horizon problem of ``window`` steps is
    re-solved every step and only its first action applied.
    """
    T = env.episode_length
    env.reset(x0, start)
    price = env.price[start:start + T]
    x_out = env.x_out[start:start + T]
    P_hi = env.P_hi
    if window is None:
        plan = solve_mpc(env.fleet, x0, price, x_out, T, P_hi)
        for t in range(T):
            env.step_units(plan.u[t])
        return env.trace()
    for t in range(T):
        h = min(window, T - t)
        plan = solve_mpc(env.fleet, env.state.x, price[t:], x_out[t:], h, P_hi, t0=t)
        env.step_units(plan.u[0])
    return env.trace()
