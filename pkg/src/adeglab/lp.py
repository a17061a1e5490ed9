"""Exact rational linear programming.

Solves ``max c.x  s.t.  A x = b, x >= 0`` over the rationals.

Two engines share one contract:

* an exact simplex method on a fraction-free integer tableau.  Every entry
  equals ``d`` times the true tableau entry, where ``d`` is the last pivot
  (a basis determinant up to sign), so each pivot is the exact integer update
  ``T'[i] = (p * T[i] - T[i, s] * T[r]) / d``.  Pricing is Dantzig's rule,
  switching to Bland's rule after a run of degenerate pivots so the method
  cannot cycle.

* a basis-verification path for larger programs.  A floating-point solver
  (HiGHS) proposes an optimal basis; the basic solution and the dual
  multipliers are then computed exactly (FLINT rational matrices) and checked
  for primal and dual feasibility.  A verified basis is optimal by the usual
  certificate; otherwise the exact simplex takes over from that basis.

Either way the returned solution is exact and optimal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    status: str
    value: Fraction | None = None
    x: list[Fraction] = field(default_factory=list)
    y: list[Fraction] = field(default_factory=list)
    pivots: int = 0
    basis: list[int] = field(default_factory=list)
    engine: str = "simplex"


def _row_to_int(row: Sequence, rhs) -> tuple[list[int], int, int]:
    vals = [Fraction(v) for v in row] + [Fraction(rhs)]
    scale = 1
    for v in vals:
        scale = math.lcm(scale, v.denominator)
    return [int(v * scale) for v in vals[:-1]], int(vals[-1] * scale), scale


class _Problem:
    """Integer form of the program: rows scaled to integers and flipped so ``b >= 0``."""

    def __init__(self, A, b, c):
        self.m = len(A)
        self.n = len(c)
        self.rows, self.rhs, self.flips, self.row_scale = [], [], [], []
        for i in range(self.m):
            if len(A[i]) != self.n:
                raise LPError(f"row {i} has {len(A[i])} entries, expected {self.n}")
            r, bi, s = _row_to_int(A[i], b[i])
            sign = -1 if bi < 0 else 1
            self.rows.append([sign * v for v in r])
            self.rhs.append(sign * bi)
            self.flips.append(sign)
            self.row_scale.append(s)
        self.cint, _, self.cscale = _row_to_int(c, 0)

    def column(self, j: int) -> list[int]:
        if j < self.n:
            return [row[j] for row in self.rows]
        e = [0] * self.m
        e[j - self.n] = 1
        return e

    def result(self, x_int: dict[int, Fraction], y_int: list[Fraction], pivots: int, basis, engine) -> LPResult:
        x = [Fraction(0)] * self.n
        for j, v in x_int.items():
            if j < self.n:
                x[j] = v
        value = sum((self.cint[j] * x[j] for j in range(self.n) if self.cint[j]), Fraction(0)) / self.cscale
        y = [yi * self.flips[i] * self.row_scale[i] / self.cscale for i, yi in enumerate(y_int)]
        return LPResult("optimal", value, x, y, pivots, list(basis), engine)


def solve(
    A: Sequence[Sequence],
    b: Sequence,
    c: Sequence,
    degenerate_limit: int = 50,
    max_pivots: int = 1_000_000,
    check: bool = True,
    warm_start: bool | None = None,
) -> LPResult:
    """Maximize ``c.x`` subject to ``A x = b`` and ``x >= 0``.

    Entries may be ints or Fractions.  ``y`` holds optimal multipliers for the
    equality rows, so that ``A^T y >= c`` and ``b.y`` equals the optimum.
    """
    prob = _Problem(A, b, c)
    if warm_start is None:
        warm_start = prob.m * prob.n > 2000
    hint = _highs_basis(prob) if warm_start else None
    res = None
    if hint is not None:
        res = _verified_basis(prob, hint)
    if res is None:
        res = _simplex(prob, hint, degenerate_limit, max_pivots)
    if check and res.status == "optimal":
        _certify(A, b, c, res)
    return res


# ---------------------------------------------------------------- exact simplex


def _simplex(prob: _Problem, start_basis, degenerate_limit: int, max_pivots: int) -> LPResult:
    m, n = prob.m, prob.n
    width = n + m + 1
    T = np.zeros((m + 2, width), dtype=object)
    T[:, :] = 0
    for i in range(m):
        T[i, :n] = prob.rows[i]
        T[i, n + i] = 1
        T[i, -1] = prob.rhs[i]
    obj2, obj1 = m, m + 1
    T[obj2, :n] = prob.cint
    for j in range(n):
        T[obj1, j] = sum(prob.rows[i][j] for i in range(m))
    T[obj1, -1] = sum(prob.rhs)
    basis = [n + i for i in range(m)]
    live = list(range(m))
    state = {"d": 1, "pivots": 0}

    def pivot(r: int, s: int) -> None:
        d = state["d"]
        p = T[r, s]
        prow = T[r].copy()
        col = T[:, s].copy()
        T[:, :] = (p * T - np.outer(col, prow)) // d
        T[r] = prow
        state["d"] = p
        basis[r] = s
        state["pivots"] += 1
        if state["pivots"] > max_pivots:
            raise LPError("pivot limit exceeded")

    def run(obj: int, allowed: int) -> str:
        degenerate_run = 0
        while True:
            sgn = 1 if state["d"] > 0 else -1
            cost = T[obj, :allowed]
            s = -1
            if degenerate_run >= degenerate_limit:
                for j in range(allowed):
                    if cost[j] * sgn > 0:
                        s = j
                        break
            else:
                best = 0
                for j in range(allowed):
                    v = cost[j] * sgn
                    if v > best:
                        best, s = v, j
            if s < 0:
                return "optimal"
            r = -1
            best_num = best_den = None
            for i in live:
                a = T[i, s] * sgn
                if a <= 0:
                    continue
                num = T[i, -1] * sgn
                if r < 0 or num * best_den < best_num * a or (num * best_den == best_num * a and basis[i] < basis[r]):
                    r, best_num, best_den = i, num, a
            if r < 0:
                return "unbounded"
            degenerate_run = degenerate_run + 1 if best_num == 0 else 0
            pivot(r, s)

    warm = False
    if start_basis is not None:
        saved = (T.copy(), list(basis), dict(state))
        for j in start_basis:
            if j >= n:
                continue
            r = next((i for i in live if basis[i] >= n and T[i, j] != 0), -1)
            if r >= 0:
                pivot(r, j)
        sgn = 1 if state["d"] > 0 else -1
        if all(T[i, -1] * sgn >= 0 for i in live) and all(T[i, -1] == 0 for i in live if basis[i] >= n):
            warm = True
        else:
            T[:, :] = saved[0]
            basis[:] = saved[1]
            state.clear()
            state.update(saved[2])

    if not warm:
        run(obj1, n)  # artificials never re-enter, so basis[i] >= n means basis[i] == n + i
        sgn = 1 if state["d"] > 0 else -1
        if T[obj1, -1] * sgn != 0:
            return LPResult("infeasible", pivots=state["pivots"])

    for i in list(live):
        if basis[i] < n:
            continue
        s = next((j for j in range(n) if T[i, j] != 0), -1)
        if s < 0:
            live.remove(i)
            T[i, :] = 0
            continue
        pivot(i, s)

    if run(obj2, n) == "unbounded":
        return LPResult("unbounded", pivots=state["pivots"])

    d = state["d"]
    x = {basis[i]: Fraction(T[i, -1], d) for i in live if basis[i] < n}
    y = [Fraction(-T[obj2, n + i], d) if i in live else Fraction(0) for i in range(m)]
    return prob.result(x, y, state["pivots"], [basis[i] for i in live], "simplex")


# ---------------------------------------------------------------- basis verification


def _highs_basis(prob: _Problem) -> list[int] | None:
    """Basic variables of a floating-point optimum (``n + i`` stands for row ``i``'s slack)."""
    try:
        import highspy
        from scipy.sparse import csc_matrix
    except ImportError:  # pragma: no cover
        return None
    m, n = prob.m, prob.n
    Af = csc_matrix(np.array(prob.rows, dtype=float).reshape(m, n))
    bf = np.array(prob.rhs, dtype=float)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("solver", "simplex")
    lp = highspy.HighsLp()
    lp.num_col_, lp.num_row_ = n, m
    lp.col_cost_ = -np.array(prob.cint, dtype=float)
    lp.col_lower_ = np.zeros(n)
    lp.col_upper_ = np.full(n, highspy.kHighsInf)
    lp.row_lower_ = bf
    lp.row_upper_ = bf
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = Af.indptr
    lp.a_matrix_.index_ = Af.indices
    lp.a_matrix_.value_ = Af.data
    h.passModel(lp)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return None
    basis = h.getBasis()
    basic = highspy.HighsBasisStatus.kBasic
    col_status, row_status = list(basis.col_status), list(basis.row_status)
    cols = [j for j in range(n) if col_status[j] == basic]
    rows = [n + i for i in range(m) if row_status[i] == basic]
    out = cols + rows
    return out if len(out) == m else None


def _verified_basis(prob: _Problem, basis: list[int]) -> LPResult | None:
    """Exact basic solution for ``basis`` if it is primal and dual feasible, else None."""
    import flint

    m, n = prob.m, prob.n
    B = flint.fmpq_mat(m, m)
    for k, j in enumerate(basis):
        col = prob.column(j)
        for i in range(m):
            if col[i]:
                B[i, k] = col[i]
    try:
        xB = B.solve(flint.fmpq_mat(m, 1, prob.rhs))
        cB = flint.fmpq_mat(m, 1, [prob.cint[j] if j < n else 0 for j in basis])
        y = B.transpose().solve(cB)
    except ZeroDivisionError:
        return None
    x = {}
    for k, j in enumerate(basis):
        v = Fraction(int(xB[k, 0].p), int(xB[k, 0].q))
        if v < 0 or (j >= n and v != 0):
            return None
        x[j] = v
    yq = [Fraction(int(y[i, 0].p), int(y[i, 0].q)) for i in range(m)]
    den = 1
    for v in yq:
        den = math.lcm(den, v.denominator)
    Y = flint.fmpz_mat(m, 1, [int(v * den) for v in yq])
    At = flint.fmpz_mat(n, m, [prob.rows[i][j] for j in range(n) for i in range(m)])
    AtY = At * Y
    for j in range(n):
        if prob.cint[j] * den > int(AtY[j, 0]):
            return None
    return prob.result(x, yq, 0, basis, "verified-basis")


def _certify(A, b, c, res: LPResult) -> None:
    """Exact optimality check: primal feasibility, dual feasibility, equal objectives."""
    x, y = res.x, res.y
    if any(v < 0 for v in x):
        raise LPError("negative primal variable")
    for i, row in enumerate(A):
        if sum((Fraction(a) * x[j] for j, a in enumerate(row) if a), Fraction(0)) != Fraction(b[i]):
            raise LPError(f"primal row {i} violated")
    n = len(c)
    for j in range(n):
        lhs = sum((Fraction(A[i][j]) * y[i] for i in range(len(A)) if A[i][j]), Fraction(0))
        if lhs < Fraction(c[j]):
            raise LPError(f"dual constraint {j} violated")
    primal = sum((Fraction(c[j]) * x[j] for j in range(n) if c[j]), Fraction(0))
    dual = sum((Fraction(b[i]) * y[i] for i in range(len(A))), Fraction(0))
    if primal != dual or primal != res.value:
        raise LPError("objective values disagree")
