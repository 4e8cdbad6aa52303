"""End-to-end acceptance criteria, one test and one report line each.

Run ``pytest tests/test_acceptance.py -v``; the verdicts are repeated in the
"acceptance criteria" section of the terminal summary.
"""
import itertools
import time

import numpy as np
import pytest

import golden
from laxhvac.baselines.mpc import COMFORT_PENALTY, comfort_bands, solve_mpc
from laxhvac.cli import main
from laxhvac.config import fixture_scenario
from laxhvac.dispatch import PowerSchedule, check_feasible, recover_schedule
from laxhvac.env import Fleet
from laxhvac.experiment import convergence_episode, evaluate, train_centralized, train_proposed
from laxhvac.thermal import ZoneParams, step_zone
from laxhvac import verify

pytestmark = pytest.mark.acceptance


def test_criterion_1_golden_instance(acceptance):
    t0 = time.perf_counter()
    sim = golden.fleet()
    sched = recover_schedule(golden.P, golden.REQUESTS, sim)
    rep = check_feasible(sched, golden.REQUESTS, sim)
    llf_bad = golden.mismatches(golden.columns(sched, rep), golden.LLF)

    swapped = recover_schedule(golden.P, golden.REQUESTS, golden.fleet(),
                               fixed={golden.SWAP_STEP: [5.0, 0.0]})
    swap_rep = check_feasible(swapped, golden.REQUESTS, golden.fleet())
    swap_l2 = swap_rep.laxity[3, 1]
    secs = time.perf_counter() - t0

    ok = not llf_bad and swap_l2 == -1.0 and secs < 1.0
    detail = (f"LLF cell mismatches: {llf_bad or 'none'}; "
              f"swapped schedule l2 at step 4 = {swap_l2:g}; {secs:.3f}s")
    acceptance(1, ok, detail)
    assert ok, detail


def test_criterion_2_zeta_round_trip(acceptance):
    r = verify.check_zeta_roundtrip(n=1000, tol=1e-9)
    ok = r.passed and r.seconds < 5.0
    acceptance(2, ok, f"{r.detail}; {r.seconds:.2f}s")
    assert ok, r.detail


def test_criterion_3_laxity_monotone(acceptance):
    r = verify.check_laxity_monotone(n=1000, tol=1e-9)
    acceptance(3, r.passed, r.detail)
    assert r.passed, r.detail


def test_criterion_4_llf_recovers_feasible_schedules(acceptance):
    r = verify.check_llf_recovery(n=200, max_units=4, max_steps=8, grid=2)
    ok = r.passed and r.seconds < 60.0
    acceptance(4, ok, f"{r.detail}; {r.seconds:.1f}s")
    assert ok, r.detail


def test_criterion_5_gradient_checks(acceptance):
    r = verify.check_gradients(n=50, tol=1e-4)
    acceptance(5, r.passed, r.detail)
    assert r.passed, r.detail


def _one_unit_enumeration():
    z = ZoneParams(a=0.2, b=2.0, x_lo=19, x_hi=23, x_target=21, u_max=4.0)
    fleet = Fleet([z])
    price, x_out, x0 = np.array([0.1, 0.3, 0.2, 0.05]), np.full(4, 5.0), 20.0
    lp_opt = solve_mpc(fleet, [x0], price, x_out, 4).objective
    targets, lo, hi = comfort_bands(fleet, 4)
    best = np.inf
    for us in itertools.product((0.0, 0.5 * z.u_max, z.u_max), repeat=4):
        x, cost = x0, 0.0
        for t, u in enumerate(us):
            x = step_zone(x, u, x_out[t], z)
            cost += price[t] * u + abs(x - targets[t, 0])
            cost += COMFORT_PENALTY * (max(lo[t, 0] - x, 0) + max(x - hi[t, 0], 0))
        best = min(best, cost)
    return lp_opt, best


def test_criterion_6_lp_correctness(acceptance):
    r = verify.check_simplex_vertices(n=100, tol=1e-8)
    lp_opt, best = _one_unit_enumeration()
    ok = r.passed and 0.0 <= lp_opt <= best
    acceptance(6, ok, f"{r.detail}; 1-unit/4-step MPC LP {lp_opt:.6f} <= enumerated {best:.6f}")
    assert ok


SEEDS = (0, 1, 2)


@pytest.fixture(scope="module")
def fixture_runs():
    sc = fixture_scenario()
    runs = []
    for seed in SEEDS:
        t0 = time.perf_counter()
        prop, prop_curve = train_proposed(sc, seed)
        cen, cen_curve = train_centralized(sc, seed)
        secs = time.perf_counter() - t0
        table = {m: (atd, tec) for m, atd, tec in evaluate(sc, prop, cen).table()}
        runs.append(dict(seed=seed, table=table, secs=secs,
                         conv_p=convergence_episode(prop_curve),
                         conv_c=convergence_episode(cen_curve)))
    return runs


def test_criterion_7_fixture_orderings(acceptance, fixture_runs):
    parts, ok_a, ok_b, ok_c = [], True, True, True
    for run in fixture_runs:
        t = run["table"]
        (m_atd, m_tec), (p_atd, p_tec), (c_atd, c_tec) = t["MPC"], t["Proposed"], t["Centralized"]
        a = p_tec < c_tec and p_atd <= c_atd + 0.1
        b = m_tec <= p_tec
        c = run["conv_p"] < run["conv_c"]
        ok_a, ok_b, ok_c = ok_a and a, ok_b and b, ok_c and c
        parts.append(f"seed {run['seed']}: ATD/TEC MPC {m_atd:.3f}/{m_tec:.1f} "
                     f"Proposed {p_atd:.3f}/{p_tec:.1f} Centralized {c_atd:.3f}/{c_tec:.1f}, "
                     f"converged at {run['conv_p']} vs {run['conv_c']}, "
                     f"{run['secs'] / 60:.1f} min [a={'ok' if a else 'no'} "
                     f"b={'ok' if b else 'no'} c={'ok' if c else 'no'}]")
    within_budget = all(run["secs"] < 30 * 60 for run in fixture_runs)
    ok = ok_a and ok_b and ok_c and within_budget
    acceptance(7, ok, "; ".join(parts))
    assert ok_a, "proposed does not beat centralized on TEC with ATD within 0.1"
    assert ok_b, "MPC TEC exceeds proposed TEC"
    assert ok_c, "proposed does not converge before centralized"
    assert within_budget


def test_criterion_8_abstraction_soundness(acceptance):
    r = verify.check_abstraction(n=1000)
    acceptance(8, r.passed, r.detail)
    assert r.passed, r.detail


def test_criterion_9_training_determinism(acceptance, tmp_path):
    for run in ("a", "b"):
        assert main(["train", "--seed", "7", "--out", str(tmp_path / run)]) == 0
    a = (tmp_path / "a" / "learning_curve.csv").read_bytes()
    b = (tmp_path / "b" / "learning_curve.csv").read_bytes()
    ok = a == b and len(a) > 0
    n = a.count(b"\n") - 1
    acceptance(9, ok, f"two seeded train runs, {n} episodes each, "
                      f"curves {'bit-identical' if ok else 'differ'}")
    assert ok
