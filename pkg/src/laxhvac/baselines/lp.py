"""Linear program container and LP text (CPLEX-style) export/parse."""
from __future__ import annotations

from dataclasses import dataclass, field
import re

import numpy as np
from scipy import sparse


@dataclass
class LinearProgram:
    """``min c @ x`` s.t. ``row_lo <= A @ x <= row_hi``, ``var_lo <= x <= var_hi``.

    ``A`` is given as COO triplets; duplicate entries are summed. Infinite
    bounds are written as ``+-np.inf``.
    """

    c: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    row_lo: np.ndarray
    row_hi: np.ndarray
    var_lo: np.ndarray
    var_hi: np.ndarray
    var_names: list[str] | None = None
    row_names: list[str] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        self.vals = np.asarray(self.vals, dtype=float)
        for name in ("row_lo", "row_hi", "var_lo", "var_hi"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n, m = len(self.c), len(self.row_lo)
        if self.var_lo.shape != (n,) or self.var_hi.shape != (n,):
            raise ValueError("variable bounds do not match the cost vector")
        if self.row_hi.shape != (m,):
            raise ValueError("row bounds differ in length")
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise ValueError("triplet arrays differ in length")
        if len(self.rows) and (self.rows.min() < 0 or self.rows.max() >= m
                               or self.cols.min() < 0 or self.cols.max() >= n):
            raise ValueError("triplet index out of range")
        if np.any(self.row_lo > self.row_hi):
            raise ValueError(f"inconsistent row bounds at row {int(np.argmax(self.row_lo > self.row_hi))}")
        if np.any(self.var_lo > self.var_hi):
            raise ValueError(f"inconsistent variable bounds at {int(np.argmax(self.var_lo > self.var_hi))}")
        if self.var_names is not None and len(self.var_names) != n:
            raise ValueError("var_names length mismatch")
        if self.row_names is not None and len(self.row_names) != m:
            raise ValueError("row_names length mismatch")

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.row_lo)

    def matrix(self) -> sparse.csr_matrix:
        return sparse.coo_matrix((self.vals, (self.rows, self.cols)),
                                 shape=(self.n_rows, self.n_vars)).tocsr()

    def dense(self) -> np.ndarray:
        return self.matrix().toarray()

    def residuals(self, x) -> tuple[float, float]:
        """Largest row-bound and variable-bound violations at ``x``."""
        ax = self.matrix() @ x
        row = np.maximum(self.row_lo - ax, 0) + np.maximum(ax - self.row_hi, 0)
        var = np.maximum(self.var_lo - x, 0) + np.maximum(x - self.var_hi, 0)
        return float(row.max(initial=0.0)), float(var.max(initial=0.0))

    def names(self):
        vn = self.var_names or [f"x{j}" for j in range(self.n_vars)]
        rn = self.row_names or [f"c{i}" for i in range(self.n_rows)]
        return vn, rn


_NAME_OK = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\[\]]*$")


def _num(v: float) -> str:
    if v == np.inf:
        return "inf"
    if v == -np.inf:
        return "-inf"
    return repr(float(v))


def _expr(coefs, names) -> str:
    if not coefs:
        return f"0 {names[0]}" if names else "0"
    parts = []
    for j, v in coefs:
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {repr(abs(float(v)))} {names[j]}")
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[1:]


def export_lp_text(lp: LinearProgram, path) -> None:
    """Write ``lp`` in LP text format.

    Two-sided (ranged) rows are split into ``<name>_lo`` and ``<name>_hi``
    rows; free rows are written as a comment so the parser can restore them.
    """
    vn, rn = lp.names()
    for name in (*vn, *rn):
        if not _NAME_OK.match(name):
            raise ValueError(f"name {name!r} is not valid in LP format")
    A = lp.matrix().tocsr()
    A.sum_duplicates()
    out = ["\\ written by laxhvac", f"\\ vars {lp.n_vars} rows {lp.n_rows}", "Minimize"]
    obj = [(j, v) for j, v in enumerate(lp.c) if v != 0.0]
    out.append(f" obj: {_expr(obj, vn)}")
    out.append("Subject To")
    for i in range(lp.n_rows):
        lo, hi = lp.row_lo[i], lp.row_hi[i]
        start, end = A.indptr[i], A.indptr[i + 1]
        coefs = [(int(j), float(v)) for j, v in zip(A.indices[start:end], A.data[start:end]) if v != 0.0]
        expr = _expr(coefs, vn)
        if lo == hi:
            out.append(f" {rn[i]}: {expr} = {_num(lo)}")
        elif np.isfinite(lo) and np.isfinite(hi):
            out.append(f" {rn[i]}_lo: {expr} >= {_num(lo)}")
            out.append(f" {rn[i]}_hi: {expr} <= {_num(hi)}")
        elif np.isfinite(lo):
            out.append(f" {rn[i]}: {expr} >= {_num(lo)}")
        elif np.isfinite(hi):
            out.append(f" {rn[i]}: {expr} <= {_num(hi)}")
        else:
            out.append(f"\\ free {rn[i]}: {expr}")
    out.append("Bounds")
    for j in range(lp.n_vars):
        lo, hi = lp.var_lo[j], lp.var_hi[j]
        if lo == -np.inf and hi == np.inf:
            out.append(f" {vn[j]} free")
        elif lo == hi:
            out.append(f" {vn[j]} = {_num(lo)}")
        else:
            out.append(f" {_num(lo)} <= {vn[j]} <= {_num(hi)}")
    out.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


_TERM = re.compile(r"([+-])?\s*([0-9.eE+-]+|inf)?\s*([A-Za-z_][A-Za-z0-9_.\[\]]*)")


def _parse_expr(text: str):
    text = text.strip()
    terms = []
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse LP expression near {text[pos:pos + 20]!r}")
        sign, num, name = m.groups()
        v = float(num) if num else 1.0
        terms.append((name, -v if sign == "-" else v))
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return terms


def _parse_num(s: str) -> float:
    s = s.strip()
    return {"inf": np.inf, "+inf": np.inf, "-inf": -np.inf}.get(s.lower(), None) or float(s)


def parse_lp_text(path) -> LinearProgram:
    """Read back a file produced by :func:`export_lp_text`."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    section = None
    obj_terms = []
    rows: list[tuple[str, list, str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    var_order: list[str] = []

    def see(name):
        if name not in bounds:
            bounds[name] = (0.0, np.inf)
            var_order.append(name)

    for ln in lines:
        s = ln.strip()
        if s.startswith("\\ free "):
            name, expr = s[len("\\ free "):].split(":", 1)
            rows.append((name.strip(), _parse_expr(expr), "free", 0.0))
            continue
        if not s or s.startswith("\\"):
            continue
        low = s.lower()
        if low in ("minimize", "subject to", "bounds", "end"):
            section = low
            continue
        if section == "minimize":
            obj_terms = _parse_expr(s.split(":", 1)[1])
        elif section == "subject to":
            name, rest = s.split(":", 1)
            m = re.match(r"(.*?)(>=|<=|=)\s*(\S+)$", rest.strip())
            if not m:
                raise ValueError(f"bad constraint line {s!r}")
            rows.append((name.strip(), _parse_expr(m.group(1)), m.group(2), _parse_num(m.group(3))))
        elif section == "bounds":
            toks = s.split()
            if len(toks) == 2 and toks[1] == "free":
                see(toks[0])
                bounds[toks[0]] = (-np.inf, np.inf)
            elif len(toks) == 3 and toks[1] == "=":
                see(toks[0])
                v = _parse_num(toks[2])
                bounds[toks[0]] = (v, v)
            elif len(toks) == 5:
                see(toks[2])
                bounds[toks[2]] = (_parse_num(toks[0]), _parse_num(toks[4]))
            else:
                raise ValueError(f"bad bounds line {s!r}")
    for _, terms, _, _ in rows:
        for name, _ in terms:
            see(name)
    for name, _ in obj_terms:
        see(name)
    # variables first seen in Bounds keep export order
    index = {n: j for j, n in enumerate(var_order)}

    merged: list[tuple[str, list, float, float]] = []
    k = 0
    while k < len(rows):
        name, terms, sense, rhs = rows[k]
        if (name.endswith("_lo") and k + 1 < len(rows) and rows[k + 1][0] == name[:-3] + "_hi"
                and sense == ">=" and rows[k + 1][2] == "<="):
            merged.append((name[:-3], terms, rhs, rows[k + 1][3]))
            k += 2
            continue
        lo, hi = {"=": (rhs, rhs), ">=": (rhs, np.inf), "<=": (-np.inf, rhs),
                  "free": (-np.inf, np.inf)}[sense]
        merged.append((name, terms, lo, hi))
        k += 1

    n = len(var_order)
    c = np.zeros(n)
    for name, v in obj_terms:
        c[index[name]] += v
    r, cc, vv = [], [], []
    for i, (_, terms, _, _) in enumerate(merged):
        for name, v in terms:
            if v != 0.0:
                r.append(i)
                cc.append(index[name])
                vv.append(v)
    return LinearProgram(
        c, r, cc, vv,
        [m[2] for m in merged], [m[3] for m in merged],
        [bounds[nm][0] for nm in var_order], [bounds[nm][1] for nm in var_order],
        var_names=var_order, row_names=[m[0] for m in merged])
