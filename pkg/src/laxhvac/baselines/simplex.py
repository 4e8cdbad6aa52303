"""Dense bounded-variable revised simplex.

Rows ``lo <= A x <= hi`` are turned into equalities ``A x - s = 0`` with
bounded slacks ``s``, so every column is a bounded (possibly free) variable.
Phase one minimizes the sum of artificials on rows whose slack starts out
of bounds; phase two keeps those artificials fixed at zero.
"""
from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np

from .lp import LinearProgram

log = logging.getLogger(__name__)


class LPError(RuntimeError):
    pass


class InfeasibleError(LPError):
    """No point satisfies the constraints."""


class UnboundedError(LPError):
    """The objective decreases without bound."""


@dataclass
class LPSolution:
    x: np.ndarray
    objective: float
    iterations: int
    status: str = "optimal"


_AT_LO, _AT_HI, _FREE_ZERO, _BASIC = 0, 1, 2, 3


class _Simplex:
    def __init__(self, A, lo, hi, tol, max_iter, refactor_every, degenerate_switch):
        self.A = A
        self.m, self.n = A.shape
        self.lo = lo
        self.hi = hi
        self.tol = tol
        self.max_iter = max_iter
        self.refactor_every = refactor_every
        self.degenerate_switch = degenerate_switch
        self.iterations = 0

    def setup(self, basis, x):
        self.basis = np.array(basis)
        self.x = x
        self.status = np.empty(self.n, dtype=np.int8)
        for j in range(self.n):
            if np.isfinite(self.lo[j]) and x[j] == self.lo[j]:
                self.status[j] = _AT_LO
            elif np.isfinite(self.hi[j]) and x[j] == self.hi[j]:
                self.status[j] = _AT_HI
            else:
                self.status[j] = _FREE_ZERO
        self.status[self.basis] = _BASIC
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        self.Binv = np.linalg.inv(B)
        nonbasic = self.status != _BASIC
        rhs = -self.A[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.Binv @ rhs
        self.since_refactor = 0

    def run(self, cost):
        tol = self.tol
        degenerate_run = 0
        while True:
            if self.iterations >= self.max_iter:
                raise LPError(f"simplex hit the iteration limit ({self.max_iter})")
            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.A
            d[self.basis] = 0.0
            st = self.status
            can_up = ((st == _AT_LO) | (st == _FREE_ZERO)) & (d < -tol) & (self.hi > self.lo)
            can_down = ((st == _AT_HI) | (st == _FREE_ZERO)) & (d > tol) & (self.hi > self.lo)
            cand = np.flatnonzero(can_up | can_down)
            if cand.size == 0:
                return
            bland = degenerate_run >= self.degenerate_switch
            q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if can_up[q] else -1.0

            alpha = self.Binv @ self.A[:, q]
            # basic x_B moves by -direction * theta * alpha
            delta = -direction * alpha
            xb = self.x[self.basis]
            lob = self.lo[self.basis]
            hib = self.hi[self.basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.full(self.m, np.inf)
                dec = delta < -1e-11
                inc = delta > 1e-11
                ratios[dec] = (xb[dec] - lob[dec]) / -delta[dec]
                ratios[inc] = (hib[inc] - xb[inc]) / delta[inc]
            ratios = np.maximum(ratios, 0.0)
            theta_flip = self.hi[q] - self.lo[q]
            r_min = ratios.min() if self.m else np.inf
            if not np.isfinite(r_min) and not np.isfinite(theta_flip):
                raise UnboundedError(f"objective unbounded along column {q}")

            if theta_flip <= r_min:
                theta = theta_flip
                self.x[self.basis] = xb + theta * delta
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                self.status[q] = _AT_HI if direction > 0 else _AT_LO
                leave = None
            else:
                theta = r_min
                ties = np.flatnonzero(ratios <= r_min + 1e-12)
                if bland:
                    leave = int(ties[np.argmin(self.basis[ties])])
                else:
                    leave = int(ties[np.argmax(np.abs(alpha[ties]))])
                self.x[self.basis] = xb + theta * delta
                self.x[q] = self.x[q] + direction * theta
                out = self.basis[leave]
                if delta[leave] < 0:
                    self.x[out] = self.lo[out]
                    self.status[out] = _AT_LO
                else:
                    self.x[out] = self.hi[out]
                    self.status[out] = _AT_HI
                self.basis[leave] = q
                self.status[q] = _BASIC
                # product-form update of the basis inverse
                piv = alpha[leave]
                row = self.Binv[leave] / piv
                self.Binv -= np.outer(alpha, row)
                self.Binv[leave] = row
                self.since_refactor += 1
                if self.since_refactor >= self.refactor_every:
                    self.refactor()
            degenerate_run = degenerate_run + 1 if theta <= tol else 0
            self.iterations += 1


def solve_lp(lp: LinearProgram, tol: float = 1e-9, max_iter: int = 50_000,
             refactor_every: int = 64, degenerate_switch: int = 50,
             bland: bool = False) -> LPSolution:
    """Solve ``lp`` to optimality.

    Dantzig pricing is used until ``degenerate_switch`` consecutive
    degenerate pivots, after which Bland's rule takes over (``bland=True``
    uses it from the start). Raises :class:`InfeasibleError` or
    :class:`UnboundedError`.
    """
    m, n = lp.n_rows, lp.n_vars
    A0 = lp.dense()
    lo = np.concatenate([lp.var_lo, lp.row_lo])
    hi = np.concatenate([lp.var_hi, lp.row_hi])
    A = np.hstack([A0, -np.eye(m)])

    # start structurals at a finite bound (or zero if free)
    x = np.where(np.isfinite(lp.var_lo), lp.var_lo, np.where(np.isfinite(lp.var_hi), lp.var_hi, 0.0))
    act = A0 @ x
    slack_ok = (act >= lp.row_lo - tol) & (act <= lp.row_hi + tol)
    art_rows = np.flatnonzero(~slack_ok)
    target = np.clip(act, lp.row_lo, lp.row_hi)
    # artificial a_i carries the gap act_i - target_i so that A x - s + sign*a = 0
    k = len(art_rows)
    art_cols = np.zeros((m, k))
    gap = act[art_rows] - target[art_rows]
    art_cols[art_rows, np.arange(k)] = -np.sign(gap)
    A = np.hstack([A, art_cols])
    lo = np.concatenate([lo, np.zeros(k)])
    hi = np.concatenate([hi, np.full(k, np.inf)])
    x_full = np.concatenate([x, np.where(slack_ok, act, target), np.abs(gap)])

    basis = np.empty(m, dtype=np.int64)
    basis[:] = n + np.arange(m)
    basis[art_rows] = n + m + np.arange(k)

    sx = _Simplex(A, lo, hi, tol, max_iter, refactor_every, 0 if bland else degenerate_switch)
    sx.setup(basis, x_full)
    if k:
        phase1 = np.zeros(n + m + k)
        phase1[n + m:] = 1.0
        sx.run(phase1)
        infeas = sx.x[n + m:].sum()
        if infeas > 1e-7 * max(1.0, np.abs(sx.x[:n]).max(initial=0.0)):
            raise InfeasibleError(f"LP infeasible (phase-one residual {infeas:.3g})")
        sx.hi[n + m:] = 0.0
        sx.x[n + m:] = np.minimum(sx.x[n + m:], 0.0)
        sx.refactor()
    cost = np.concatenate([lp.c, np.zeros(m + k)])
    sx.run(cost)
    sx.refactor()
    xs = sx.x[:n].copy()
    return LPSolution(xs, float(lp.c @ xs), sx.iterations)
