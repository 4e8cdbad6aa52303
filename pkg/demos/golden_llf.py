"""Replay the two-request toy instance under LLF and with a forced swap.

    python demos/golden_llf.py
"""
import numpy as np

from laxhvac.dispatch import AbstractFleet, check_feasible, recover_schedule
from laxhvac.laxity import Request

U_MAX = 5.0
REQUESTS = [Request(0, 0, 5), Request(1, 0, 4)]
P = np.array([10.0, 0.0, 5.0, 10.0, 5.0, 0.0])


def show(title, fixed=None):
    sim = AbstractFleet([3.0, 3.0], U_MAX)
    sched = recover_schedule(P, REQUESTS, sim, fixed=fixed)
    rep = check_feasible(sched, REQUESTS, sim)
    print(title)
    print("  step  P     e1 rem1 l1 u1   e2 rem2 l2 u2")
    for t in range(len(P)):
        row = [rep.work[t, 0], rep.remaining[t, 0], rep.laxity[t, 0], sched.per_unit[t, 0],
               rep.work[t, 1], rep.remaining[t, 1], rep.laxity[t, 1], sched.per_unit[t, 1]]
        print(f"  {t + 1:>4} {P[t]:>4g}  " + " ".join(f"{v:>3g}" for v in row[:4])
              + "  " + " ".join(f"{v:>3g}" for v in row[4:]))
    print("  feasible" if rep.feasible else f"  infeasible: {rep.violation}")


if __name__ == "__main__":
    show("LLF")
    show("request 1 served first at step 3", fixed={2: [5.0, 0.0]})
