"""Two-request toy instance printed in the reference table.

Steps are 0-based here (column k of the table is index k - 1). Each row
lists values for steps 1..6 as printed.
"""
import numpy as np

from laxhvac.dispatch import AbstractFleet
from laxhvac.laxity import Request

U_MAX = 5.0
WORK = [3.0, 3.0]  # in units of full-power steps
REQUESTS = [Request(0, 0, 5), Request(1, 0, 4)]
P = [10.0, 0.0, 5.0, 10.0, 5.0, 0.0]
SWAP_STEP = 2  # printed step 3

LLF = {
    "e1": [3, 2, 2, 2, 1, 0],
    "rem1": [5, 4, 3, 2, 1, 0],
    "l1": [2, 2, 1, 0, 0, 0],
    "u1": [5, 0, 0, 5, 5, 0],
    "e2": [3, 2, 2, 1, 0, 0],
    "rem2": [4, 3, 2, 1, 0, 0],
    "l2": [2, 1, 0, 0, 0, 0],
    "u2": [5, 0, 5, 5, 0, 0],
}

NON_LLF = {
    "e1": [3, 2, 2, 1, 0, 0],
    "rem1": [5, 4, 3, 2, 1, 0],
    "l1": [2, 2, 1, 1, 1, 0],
    "u1": [5, 0, 5, 5, 0, 0],
    "e2": [3, 2, 2, 2, 1, 1],
    "rem2": [4, 3, 2, 1, 0, -1],
    "l2": [2, 1, 0, -1, -1, -2],
    "u2": [5, 0, 0, 5, 0, 0],
}


def fleet():
    return AbstractFleet(WORK, U_MAX)


def columns(schedule, report) -> dict:
    """Table rows recomputed from a schedule and its feasibility report."""
    out = {}
    for i in range(2):
        out[f"e{i + 1}"] = report.work[:6, i].tolist()
        out[f"rem{i + 1}"] = report.remaining[:6, i].tolist()
        out[f"l{i + 1}"] = report.laxity[:6, i].tolist()
        out[f"u{i + 1}"] = schedule.per_unit[:6, i].tolist()
    return out


def mismatches(got: dict, want: dict) -> list[str]:
    bad = []
    for key, row in want.items():
        for k, (g, w) in enumerate(zip(got[key], row)):
            if not np.isclose(g, w, rtol=0, atol=1e-12):
                bad.append(f"{key} step {k + 1}: got {g:g}, table {w:g}")
    return bad
