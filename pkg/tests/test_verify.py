import itertools

import numpy as np
import pytest

from laxhvac.dispatch import AbstractFleet, check_feasible, recover_schedule
from laxhvac.laxity import Request
from laxhvac.verify import (CheckResult, check_abstraction, check_laxity_monotone,
                            check_llf_recovery, check_zeta_roundtrip, feasible_totals,
                            flow_feasible, random_zone, working_outdoor)


def brute_feasible(P, work, deadlines, grid=2):
    """Search every per-unit allocation on the lattice (tiny instances only).

    ``P[t]`` bounds what step ``t`` can deliver; power beyond the remaining
    demand goes unallocated, as in the dispatcher.
    """
    N, T = len(work), len(P)
    opts = [k / grid for k in range(grid + 1)]

    def rec(t, left):
        if t == T:
            return all(abs(x) < 1e-12 for x in left)
        for u in itertools.product(opts, repeat=N):
            if sum(u) > P[t] + 1e-12:
                continue
            if any(u[i] > 0 and t >= deadlines[i] for i in range(N)):
                continue
            if any(u[i] > left[i] + 1e-12 for i in range(N)):
                continue
            if rec(t + 1, [left[i] - u[i] for i in range(N)]):
                return True
        return False

    return rec(0, list(work))


def test_flow_oracle_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(150):
        N, T = int(rng.integers(1, 3)), int(rng.integers(1, 4))
        deadlines = rng.integers(1, T + 1, size=N)
        work = [rng.integers(0, 2 * d + 1) / 2 for d in deadlines]
        P = rng.integers(0, 2 * N + 1, size=T) / 2
        assert flow_feasible(P, work, deadlines) == brute_feasible(P, work, deadlines), \
            (P, work, deadlines)


def test_enumeration_is_complete_and_sound():
    work, deadlines, T = [1.0, 0.5], [2, 3], 3
    levels = [0.0, 0.5, 1.0, 1.5, 2.0]
    got = {tuple(p) for p in feasible_totals(work, deadlines, T, levels, limit=10**6)}
    want = {p for p in itertools.product(levels, repeat=T) if brute_feasible(p, work, deadlines)}
    assert got == want


def test_enumeration_respects_limit():
    assert len(list(feasible_totals([1.0], [3], 3, [0.0, 0.5, 1.0], limit=4))) == 4


def test_llf_whole_unit_counterexample():
    # ties at step 0 go to the lower index, which leaves unit 1 short later
    work, deadlines, P = [1.0, 2.0], [2, 3], [1.0, 2.0, 0.0]
    assert flow_feasible(P, work, deadlines, grid=1)
    sim = AbstractFleet(np.array(work), 1.0)
    reqs = [Request(i, 0, d) for i, d in enumerate(deadlines)]
    sched = recover_schedule(np.array(P), reqs, sim)
    rep = check_feasible(sched, reqs, sim)
    assert not rep.feasible
    assert sched.per_unit.tolist() == [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]


def test_zone_sampler_supports_reaching_target():
    rng = np.random.default_rng(1)
    for _ in range(100):
        p = random_zone(rng)
        x_out = working_outdoor(p, rng, p.x_lo, p.x_hi)
        assert p.b * p.u_max / p.a + x_out > p.x_hi


def test_check_result_line():
    r = CheckResult("demo", True, "ok", 0.5)
    assert r.line() == "[PASS] demo: ok (0.50s)"


@pytest.mark.parametrize("check", [check_zeta_roundtrip, check_laxity_monotone,
                                   check_abstraction])
def test_small_suites_pass(check):
    r = check(n=40)
    assert r.passed, r.detail


def test_llf_suite_reports_counterexamples():
    r = check_llf_recovery(n=10, seed=2)
    assert r.data["instances_feasible"] == 10
    for ce in r.data["counterexamples"]:
        assert flow_feasible(ce["P"], ce["work"], ce["deadlines"])
