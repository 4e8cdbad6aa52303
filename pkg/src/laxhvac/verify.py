"""Randomized property suites with independent oracles.

Each ``check_*`` function returns a :class:`CheckResult`; the ``verify``
CLI subcommand runs them all and prints one line per check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import functools
import time

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .dispatch import AbstractFleet, check_feasible, recover_schedule
from .laxity import LAXITY_INF, Request, laxity, zeta
from .thermal import ZoneParams, step_zone


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    return wrapper


# -- random parameters satisfying the working-HVAC condition ---------------

def random_zone(rng: np.random.Generator, dt: float = 1.0) -> ZoneParams:
    """Random zone whose full-power reach ``b u_max / a`` is 15-60 degC."""
    target = rng.uniform(19.0, 24.0)
    half = rng.uniform(1.0, 3.0)
    a = rng.uniform(0.05, 0.5)
    u_max = rng.uniform(1.0, 10.0)
    b = rng.uniform(15.0, 60.0) * a / u_max
    return ZoneParams(a=a, b=b, x_lo=target - half, x_hi=target + half, x_target=target,
                      u_max=u_max, dt=dt)


def working_outdoor(p: ZoneParams, rng: np.random.Generator, lo: float, hi: float) -> float:
    """Outdoor temperature with ``b u_max / a > |x_out - x|`` for all x in ``[lo, hi]``."""
    reach = p.b * p.u_max / p.a
    o_lo, o_hi = hi - reach, lo + reach
    if o_lo >= o_hi:
        raise ValueError("capacity too small for this envelope")
    m = 0.02 * (o_hi - o_lo)
    return float(rng.uniform(o_lo + m, o_hi - m))


# -- zeta round trip ---------------------------------------------------------

@_timed
def check_zeta_roundtrip(n: int = 1000, seed: int = 0, tol: float = 1e-9) -> CheckResult:
    """Simulate k full-power steps exactly, invert with zeta, recover k."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        p = random_zone(rng)
        lo, hi = p.x_lo - 3, p.x_hi + 3
        x2 = rng.uniform(lo, hi)
        x_out = working_outdoor(p, rng, lo, hi)
        k = int(rng.integers(1, 6))
        u = p.u_max if rng.random() < 0.5 else -p.u_max
        x1 = x2
        for _ in range(k):
            x1 = step_zone(x1, u, x_out, p)
        worst = max(worst, abs(zeta(x1, x2, u, x_out, p) - k))
    return CheckResult("zeta round trip", worst <= tol,
                       f"{n} cases, max |k - zeta| = {worst:.2e}", data={"max_error": worst})


# -- monotone laxity ---------------------------------------------------------

@_timed
def check_laxity_monotone(n: int = 1000, seed: int = 1, steps: int = 24,
                          tol: float = 1e-9) -> CheckResult:
    """In-band laxity never rises; at full power toward target it stays put."""
    rng = np.random.default_rng(seed)
    rises, worst_rise, worst_served, checked = 0, -np.inf, 0.0, 0
    for _ in range(n):
        # short timesteps keep trajectories inside the band for several steps
        p = random_zone(rng, dt=float(rng.uniform(0.02, 0.3)))
        x_out = working_outdoor(p, rng, p.x_lo - 1, p.x_hi + 1)
        req = Request(0, 0, steps + 5)
        x = rng.uniform(p.x_lo, p.x_hi)
        lax = laxity(req, 0, x, x_out, p)
        for t in range(steps):
            mode = rng.integers(3)
            toward = p.u_max if x < p.x_target else -p.u_max
            u = toward if mode == 0 else rng.uniform(-p.u_max, p.u_max)
            x_new = step_zone(x, u, x_out, p)
            crossed = (x - p.x_target) * (x_new - p.x_target) <= 0
            if crossed or not p.x_lo <= x_new <= p.x_hi:
                break
            new = laxity(req, t + 1, x_new, x_out, p)
            checked += 1
            worst_rise = max(worst_rise, new - lax)
            if new > lax + tol:
                rises += 1
            if mode == 0:
                worst_served = max(worst_served, abs(new - lax))
            x, lax = x_new, new
    ok = rises == 0 and worst_served <= tol
    return CheckResult("laxity monotone", ok,
                       f"{checked} transitions, max rise {worst_rise:.2e}, "
                       f"max |change| at full power {worst_served:.2e}",
                       data={"rises": rises, "served_error": worst_served})


# -- LLF recovery ------------------------------------------------------------

def flow_feasible(P, work, deadlines, grid: int = 2) -> bool:
    """Max-flow test: can per-unit powers on a ``1/grid`` lattice meet every deadline?

    Power is measured in units of ``u_max`` (shared by all units); unit ``i``
    may draw up to one unit per step in steps ``0 .. deadlines[i] - 1``.
    """
    N, T = len(work), len(P)
    src, sink = 0, 1 + N + T
    r, c, cap = [], [], []
    for i in range(N):
        r.append(src)
        c.append(1 + i)
        cap.append(int(round(grid * work[i])))
        for t in range(min(int(deadlines[i]), T)):
            r.append(1 + i)
            c.append(1 + N + t)
            cap.append(grid)
    for t in range(T):
        r.append(1 + N + t)
        c.append(sink)
        cap.append(int(round(grid * P[t])))
    g = csr_matrix((np.array(cap, dtype=np.int32), (r, c)), shape=(sink + 1, sink + 1))
    return maximum_flow(g, src, sink).flow_value == int(round(grid * sum(work)))


def feasible_totals(work, deadlines, T: int, levels, limit: int):
    """Lexicographic enumeration of feasible total schedules over ``levels``.

    A prefix is dropped only when full power afterwards still cannot finish
    the work, so every yielded schedule is feasible and none is skipped.
    """
    top = levels[-1]
    found = 0
    stack = [()]
    while stack and found < limit:
        prefix = stack.pop()
        if len(prefix) == T:
            found += 1
            yield np.array(prefix, dtype=float)
            continue
        for v in reversed(levels):
            nxt = prefix + (v,)
            if flow_feasible(list(nxt) + [top] * (T - len(nxt)), work, deadlines):
                stack.append(nxt)


def random_llf_instance(rng: np.random.Generator, max_units: int = 4, max_steps: int = 8,
                        grid: int = 2):
    N = int(rng.integers(1, max_units + 1))
    T = int(rng.integers(1, max_steps + 1))
    deadlines = rng.integers(1, T + 1, size=N)
    work = np.array([rng.integers(0, grid * d + 1) / grid for d in deadlines])
    return work, deadlines, T


@_timed
def check_llf_recovery(n: int = 200, seed: int = 2, schedules_per_instance: int = 20,
                       max_units: int = 4, max_steps: int = 8, grid: int = 2) -> CheckResult:
    """Every feasible total schedule found by search survives LLF recovery.

    Work, deadlines and per-step totals live on a ``1/grid`` lattice in units
    of ``u_max``; ``grid=1`` restricts to whole-unit instances.
    """
    rng = np.random.default_rng(seed)
    with_feasible, tested, counter = 0, 0, []
    for _ in range(n):
        work, deadlines, T = random_llf_instance(rng, max_units, max_steps, grid)
        N = len(work)
        levels = [k / grid for k in range(grid * N + 1)]
        reqs = [Request(i, 0, int(d)) for i, d in enumerate(deadlines)]
        any_found = False
        for P in feasible_totals(work, deadlines, T, levels, schedules_per_instance):
            any_found = True
            tested += 1
            sim = AbstractFleet(work, 1.0)
            sched = recover_schedule(P, reqs, sim)
            rep = check_feasible(sched, reqs, sim)
            if not rep.feasible:
                counter.append({"work": work.tolist(), "deadlines": deadlines.tolist(),
                                "P": P.tolist(), "u": sched.per_unit.tolist(),
                                "violation": str(rep.violation)})
        with_feasible += any_found
    detail = (f"{with_feasible}/{n} instances feasible, {tested} schedules tested, "
              f"{len(counter)} counterexamples")
    if counter:
        ce = counter[0]
        detail += f"; e.g. work={ce['work']} deadlines={ce['deadlines']} P={ce['P']}"
    return CheckResult("LLF recovers feasible schedules", not counter, detail,
                       data={"counterexamples": counter, "instances_feasible": with_feasible,
                             "schedules_tested": tested})


# -- gradients -------------------------------------------------------------------

def _rel_err(g, fd) -> float:
    scale = max(np.linalg.norm(g) + np.linalg.norm(fd), 1e-12)
    return float(np.linalg.norm(g - fd) / scale)


def _fd(fn, params, eps: float = 1e-6) -> np.ndarray:
    """Central differences of scalar ``fn()`` over ``params.flat()``."""
    theta = params.flat()
    out = np.empty_like(theta)
    for k in range(theta.size):
        v = theta.copy()
        v[k] += eps
        params.set_flat(v)
        up = fn()
        v[k] -= 2 * eps
        params.set_flat(v)
        down = fn()
        out[k] = (up - down) / (2 * eps)
    params.set_flat(theta)
    return out


def _random_net_setup(rng):
    from .rl.nets import NetworkParameters

    obs_dim = int(rng.integers(1, 4))
    act_dim = int(rng.integers(1, 3))
    hidden = [int(h) for h in rng.integers(2, 6, size=int(rng.integers(1, 3)))]
    actor = NetworkParameters.init([obs_dim, *hidden, act_dim], rng, final_scale=1.0)
    critic = NetworkParameters.init([obs_dim + act_dim, *hidden, 1], rng, final_scale=1.0)
    lo = rng.uniform(-3, 0, act_dim)
    hi = lo + rng.uniform(0.5, 4, act_dim)
    batch = int(rng.integers(1, 6))
    s = rng.normal(size=(batch, obs_dim))
    a = rng.uniform(lo, hi, size=(batch, act_dim))
    return actor, critic, lo, hi, s, a


@_timed
def check_gradients(n: int = 50, seed: int = 3, tol: float = 1e-4) -> CheckResult:
    """Actor, critic-loss and policy-gradient derivatives vs central differences."""
    from .rl.ddpg import (actor_backward, actor_forward, actor_objective, critic_action_grad,
                          critic_forward, critic_loss)

    rng = np.random.default_rng(seed)
    worst = {"actor": 0.0, "critic": 0.0, "policy": 0.0, "dq_da": 0.0}
    for _ in range(n):
        actor, critic, lo, hi, s, a = _random_net_setup(rng)
        w = rng.normal(size=(len(s), len(lo)))

        # actor output contracted with random weights
        def actor_fn():
            return float(np.sum(w * actor_forward(actor, s, lo, hi)[0]))

        _, cache = actor_forward(actor, s, lo, hi)
        g, _ = actor_backward(actor, cache, w, lo, hi)
        worst["actor"] = max(worst["actor"], _rel_err(g.flat(), _fd(actor_fn, actor)))

        y = rng.normal(size=len(s))
        _, g = critic_loss(critic, s, a, y, lo, hi)
        fd = _fd(lambda: critic_loss(critic, s, a, y, lo, hi)[0], critic)
        worst["critic"] = max(worst["critic"], _rel_err(g.flat(), fd))

        _, g = actor_objective(actor, critic, s, lo, hi)
        fd = _fd(lambda: actor_objective(actor, critic, s, lo, hi)[0], actor)
        worst["policy"] = max(worst["policy"], _rel_err(g.flat(), fd))

        _, dq = critic_action_grad(critic, s, a, lo, hi)
        fd = np.empty_like(a)
        for j in range(a.shape[1]):
            e = np.zeros_like(a)
            e[:, j] = 1e-6
            fd[:, j] = (critic_forward(critic, s, a + e, lo, hi)[0]
                        - critic_forward(critic, s, a - e, lo, hi)[0]) / 2e-6
        worst["dq_da"] = max(worst["dq_da"], _rel_err(dq, fd))
    ok = max(worst.values()) <= tol
    detail = f"{n} random nets, max relative error " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return CheckResult("gradient checks", ok, detail, data=worst)


# -- LP vs vertex enumeration -------------------------------------------------------

def random_tiny_lp(rng: np.random.Generator, max_vars: int = 6, max_rows: int = 6):
    """Bounded random LP (all variables boxed) that is feasible by construction."""
    from .baselines.lp import LinearProgram

    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    A = np.round(rng.normal(size=(m, n)), 2)
    A[rng.random((m, n)) < 0.3] = 0.0
    var_lo = np.round(rng.uniform(-3, 0, n), 2)
    var_hi = var_lo + np.round(rng.uniform(0.5, 4, n), 2)
    x0 = rng.uniform(var_lo, var_hi)
    act = A @ x0
    kind = rng.integers(3, size=m)
    row_lo = np.where(kind == 1, -np.inf, np.floor(act * 100) / 100 - rng.uniform(0, 1, m))
    row_hi = np.where(kind == 0, np.inf, np.ceil(act * 100) / 100 + rng.uniform(0, 1, m))
    eq = rng.random(m) < 0.15
    row_lo = np.where(eq, act, row_lo)
    row_hi = np.where(eq, act, row_hi)
    c = np.round(rng.normal(size=n), 2)
    r, col = np.nonzero(A)
    return LinearProgram(c, r, col, A[r, col], row_lo, row_hi, var_lo, var_hi)


def vertex_optimum(lp, tol: float = 1e-9) -> float:
    """Minimum of ``c @ x`` over every basic solution of a bounded LP.

    All finite row and variable bounds form the constraint set; each choice
    of ``n`` linearly independent ones is solved as a square system and kept
    if feasible.
    """
    import itertools

    A = lp.dense()
    n = lp.n_vars
    G, h = [], []
    for i in range(lp.n_rows):
        for bound in (lp.row_lo[i], lp.row_hi[i]):
            if np.isfinite(bound):
                G.append(A[i])
                h.append(bound)
    for j in range(n):
        for bound in (lp.var_lo[j], lp.var_hi[j]):
            if np.isfinite(bound):
                e = np.zeros(n)
                e[j] = 1.0
                G.append(e)
                h.append(bound)
    G, h = np.array(G), np.array(h)
    best = np.inf
    for idx in itertools.combinations(range(len(G)), n):
        M = G[list(idx)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(idx)])
        row, var = lp.residuals(x)
        if row <= 1e-7 and var <= 1e-7:
            best = min(best, float(lp.c @ x))
    return best


@_timed
def check_simplex_vertices(n: int = 100, seed: int = 4, tol: float = 1e-8) -> CheckResult:
    from .baselines.simplex import solve_lp

    rng = np.random.default_rng(seed)
    worst, bad_resid = 0.0, 0.0
    for _ in range(n):
        lp = random_tiny_lp(rng)
        sol = solve_lp(lp)
        ref = vertex_optimum(lp)
        worst = max(worst, abs(sol.objective - ref))
        bad_resid = max(bad_resid, *lp.residuals(sol.x))
    ok = worst <= tol and bad_resid <= 1e-7
    return CheckResult("simplex vs vertex enumeration", ok,
                       f"{n} LPs, max |objective gap| {worst:.1e}, max residual {bad_resid:.1e}",
                       data={"max_gap": worst, "max_residual": bad_resid})


# -- abstraction soundness ------------------------------------------------------------

@_timed
def check_abstraction(n: int = 1000, seed: int = 5) -> CheckResult:
    """Distinct fleet states with equal ``(c, L)`` get bit-identical rewards."""
    from .env import FleetState, RewardConfig, abstract, reward

    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(n):
        N = int(rng.integers(1, 12))
        # dyadic laxities keep every partial sum exact, so reorderings and
        # splits of the same multiset of values share one float total
        lax = rng.integers(-40, 200, size=N) / 4.0
        lax[rng.random(N) < 0.1] = LAXITY_INF
        perm = rng.permutation(N)
        lax2 = lax[perm]
        finite = np.flatnonzero(lax2 < LAXITY_INF)
        if finite.size >= 2:
            # move laxity between two live units; L is unchanged
            i, j = rng.choice(finite, 2, replace=False)
            d = rng.integers(-8, 9) / 4.0
            lax2[i] += d
            lax2[j] -= d
        price = float(rng.uniform(0, 0.5))
        cfg = RewardConfig(alpha=float(rng.uniform(0, 1)), beta=float(rng.uniform(0.1, 2)))
        P = float(rng.uniform(0, 50))

        def fleet_state(lx):
            reqs = tuple(Request(i, 0, 24, laxity=float(v)) for i, v in enumerate(lx))
            return FleetState(rng.uniform(15, 27, N), reqs, price, float(rng.uniform(-5, 30)), 0)

        s1, s2 = fleet_state(lax), fleet_state(lax2)
        if abstract(s1) != abstract(s2) or reward(s1, P, cfg) != reward(s2, P, cfg):
            mismatches += 1
    return CheckResult("abstraction soundness", mismatches == 0,
                       f"{n} state pairs, {mismatches} reward mismatches",
                       data={"mismatches": mismatches})
