import itertools

import numpy as np
import pytest

from laxhvac.baselines.mpc import (COMFORT_PENALTY, build_mpc_lp, comfort_bands, run_mpc,
                                   solve_mpc, trace_cost)
from laxhvac.baselines.simplex import solve_lp
from laxhvac.env import Fleet, LaxityEnv, rollout
from laxhvac.thermal import ZoneParams, step_zone

Z = ZoneParams(a=0.2, b=2.0, x_lo=19, x_hi=23, x_target=21, u_max=4.0)


def discrete_cost(us, x0, price, x_out, p, fleet):
    targets, lo, hi = comfort_bands(fleet, len(us))
    x, total = x0, 0.0
    for t, u in enumerate(us):
        x = step_zone(x, u, x_out[t], p)
        total += price[t] * abs(u) + abs(x - targets[t, 0])
        total += COMFORT_PENALTY * (max(lo[t, 0] - x, 0) + max(x - hi[t, 0], 0))
    return total


def test_at_target_free_power_is_idle():
    # x_out equal to the target keeps the zone there with u = 0
    fleet = Fleet([Z])
    r = solve_mpc(fleet, [21.0], [0.0], [21.0], 1)
    assert r.u[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert r.objective == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("x0,x_out", [(20.0, 5.0), (22.5, 10.0), (19.5, 30.0)])
def test_relaxation_below_discrete_enumeration(x0, x_out):
    fleet = Fleet([Z])
    price, xo = np.array([0.1, 0.3, 0.2, 0.05]), np.full(4, x_out)
    lp_opt = solve_mpc(fleet, [x0], price, xo, 4).objective
    levels = (0.0, 0.5 * Z.u_max, Z.u_max, -0.5 * Z.u_max, -Z.u_max)
    best = min(discrete_cost(us, x0, price, xo, Z, fleet)
               for us in itertools.product(levels, repeat=4))
    assert 0.0 <= lp_opt <= best + 1e-9


def test_price_scaling_only_touches_energy():
    fleet = Fleet([Z])
    price = np.array([0.1, 0.3, 0.2])
    a = build_mpc_lp(fleet, [20.0], price, np.full(3, 5.0), 3)
    b = build_mpc_lp(fleet, [20.0], 3.0 * price, np.full(3, 5.0), 3)
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, a.n_vars)
    n_energy = 2 * 3  # heating and cooling blocks come first
    energy = a.c[:n_energy] @ x[:n_energy]
    assert b.c @ x == pytest.approx(a.c @ x + 2.0 * energy, rel=1e-12)
    assert np.array_equal(a.c[n_energy:], b.c[n_energy:])


def small_env(rng, n_units=3, T=8):
    zones = []
    for _ in range(n_units):
        a = rng.uniform(0.1, 0.3)
        u_max = rng.uniform(3, 6)
        zones.append(ZoneParams(a=a, b=rng.uniform(30, 45) * a / u_max, x_lo=19, x_hi=23,
                                x_target=21, u_max=u_max))
    price = rng.uniform(0.05, 0.3, T + 1)
    x_out = rng.uniform(0, 12, T + 1)
    return LaxityEnv(Fleet(zones), price, x_out, episode_length=T)


@pytest.mark.parametrize("seed", range(3))
def test_mpc_dominates_other_controllers(seed):
    rng = np.random.default_rng(seed)
    env = small_env(rng)
    x0 = rng.uniform(19.5, 22.5, env.fleet.n_units)
    mpc = run_mpc(env, x0)
    best = trace_cost(mpc, env.fleet)
    for P in (0.0, 0.5 * env.P_hi, env.P_hi):
        tr = rollout(env, lambda obs, P=P: P, x0)
        assert best <= trace_cost(tr, env.fleet) + 1e-9
    # the LP objective is the cost of its own trace
    plan = solve_mpc(env.fleet, x0, env.price[:8], env.x_out[:8], 8, env.P_hi)
    assert plan.objective == pytest.approx(best, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_solution_residuals(seed):
    rng = np.random.default_rng(seed)
    env = small_env(rng, T=12)
    lp = build_mpc_lp(env.fleet, np.full(3, 20.0), env.price, env.x_out, 12, 0.6 * env.P_hi)
    sol = solve_lp(lp)
    assert max(lp.residuals(sol.x)) <= 1e-7


def test_total_power_row_binds():
    rng = np.random.default_rng(4)
    env = small_env(rng, T=6)
    cap = 0.3 * env.fleet.u_max.sum()
    r = solve_mpc(env.fleet, np.full(3, 19.0), env.price, np.full(7, 0.0), 6, cap)
    assert np.all(np.abs(r.u).sum(axis=1) <= cap + 1e-7)


def test_receding_horizon_full_window_matches_open_loop():
    rng = np.random.default_rng(5)
    env = small_env(rng, T=6)
    x0 = np.full(3, 20.0)
    open_loop = run_mpc(env, x0)
    receding = run_mpc(env, x0, window=6)
    assert trace_cost(receding, env.fleet) == pytest.approx(trace_cost(open_loop, env.fleet),
                                                            rel=1e-7)


def test_short_window_no_better_than_full():
    rng = np.random.default_rng(6)
    env = small_env(rng, T=8)
    x0 = np.full(3, 20.0)
    full = trace_cost(run_mpc(env, x0), env.fleet)
    short = trace_cost(run_mpc(env, x0, window=2), env.fleet)
    assert full <= short + 1e-9


def test_horizon_longer_than_data_rejected():
    with pytest.raises(ValueError, match="shorter"):
        build_mpc_lp(Fleet([Z]), [20.0], [0.1], [5.0], 3)
