"""Approximate degree, one-sided approximate degree and their dual witnesses.

For a fixed degree ``d`` one linear program gives everything at once.  Its
variables are the positive and negative parts of a measure ``psi`` on the
domain; it maximizes ``<f, psi>`` subject to ``||psi||_1 <= 1`` and ``psi``
orthogonal to every monomial of degree ``<= d``.  The optimum is the least
uniform error ``E(d)`` of a degree-``d`` approximant, the optimal
multipliers of the orthogonality rows are the coefficients of such an
approximant, and ``psi`` itself witnesses that degree ``d`` cannot do better.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Mapping

from .hypercube import PartialFunction, ResourceError, TruthTable, WeightWindow, popcount, restrict_weight
from .lp import LPError, solve
from .poly import INF, MultilinearPoly, RationalMeasure, as_fraction, bits_of, orth

MAX_POINTS = int(os.environ.get("ADEGLAB_MAX_POINTS", "4096"))


@dataclass(frozen=True)
class RealFunction:
    """Rational-valued function on a set of hypercube points."""

    arity: int
    points: tuple[int, ...]
    values: tuple[Fraction, ...]
    name: str = ""

    @classmethod
    def of(cls, f, name: str = "") -> "RealFunction":
        if isinstance(f, RealFunction):
            return f
        if isinstance(f, TruthTable):
            f = f.to_partial()
        if isinstance(f, PartialFunction):
            return cls(f.arity, f.points, tuple(Fraction(v) for v in f.values), name)
        raise TypeError(f"cannot interpret {type(f).__name__} as a function")

    @classmethod
    def from_dict(cls, arity: int, table: Mapping[int, object], name: str = "") -> "RealFunction":
        pts = tuple(sorted(table))
        return cls(arity, pts, tuple(as_fraction(table[x]) for x in pts), name)

    def as_dict(self) -> dict[int, Fraction]:
        return dict(zip(self.points, self.values))

    def is_boolean(self) -> bool:
        return all(v in (0, 1) for v in self.values)

    def levels(self) -> dict[int, Fraction] | None:
        """Per-weight values when the function is symmetric on full weight levels, else None."""
        seen: dict[int, Fraction] = {}
        counts: dict[int, int] = {}
        for x, v in zip(self.points, self.values):
            w = popcount(x)
            if seen.setdefault(w, v) != v:
                return None
            counts[w] = counts.get(w, 0) + 1
        if any(c != comb(self.arity, w) for w, c in counts.items()):
            return None
        return dict(sorted(seen.items()))

    def digest(self) -> str:
        h = hashlib.sha256(f"{self.arity}|".encode())
        for x, v in zip(self.points, self.values):
            h.update(f"{x}:{v};".encode())
        return h.hexdigest()[:16]

    @property
    def ident(self) -> str:
        return self.name or f"fn-{self.digest()}"


def pm_encoding(f) -> RealFunction:
    """The function ``(-1)^f = 1 - 2f``."""
    g = RealFunction.of(f)
    return RealFunction(g.arity, g.points, tuple(1 - 2 * v for v in g.values), (g.name + "-pm") if g.name else "")


def negate(f) -> RealFunction:
    g = RealFunction.of(f)
    if not g.is_boolean():
        raise ValueError("negation needs a Boolean function")
    return RealFunction(g.arity, g.points, tuple(1 - v for v in g.values), (g.name + "-neg") if g.name else "")


@dataclass(frozen=True)
class WitnessReport:
    correlation: Fraction
    l1: Fraction
    orth: object
    one_sided_ok: bool

    def certifies(self, d: int, eps, one_sided: bool = False) -> bool:
        """True iff the witness proves degree ``>= d`` at error ``eps``."""
        ok = self.orth >= d and self.correlation > Fraction(eps) * self.l1
        return ok and (self.one_sided_ok or not one_sided)


def witness_report(f, psi: RationalMeasure, orth_upto: int | None = None) -> WitnessReport:
    """Recompute a witness's figures of merit from the measure itself."""
    g = RealFunction.of(f)
    table = g.as_dict()
    if any(x not in table for x in psi.support()):
        raise ValueError("witness is supported outside the function's domain")
    corr = sum((v * table[x] for x, v in psi.items()), Fraction(0))
    one_ok = all(v >= 0 for x, v in psi.items() if table[x] == 1)
    o = orth(psi) if orth_upto is None else orth(psi, upto=orth_upto)
    return WitnessReport(corr, psi.l1(), o, one_ok)


@dataclass(frozen=True)
class ErrorLP:
    """Solution of the degree-``d`` program."""

    degree: int
    error: Fraction
    poly: MultilinearPoly
    witness: RationalMeasure
    route: str
    pivots: int


@dataclass(frozen=True)
class DegreeResult:
    function_id: str
    eps: Fraction
    degree: object
    one_sided: bool = False
    primal: MultilinearPoly | None = None
    primal_error: Fraction | None = None
    witness: RationalMeasure | None = None
    witness_report: WitnessReport | None = None
    errors: Mapping[int, Fraction] = field(default_factory=dict)

    def consistent(self, f) -> bool:
        """Re-check both certificates by exact evaluation on the domain."""
        if self.degree == INF:
            return self.eps < 0
        ok = True
        if self.primal is not None:
            ok &= self.primal.degree <= self.degree
            ok &= primal_error(f, self.primal, self.one_sided) <= self.eps
        if self.degree >= 1:
            if self.witness is None:
                return False
            rep = witness_report(f, self.witness)
            ok &= rep.certifies(self.degree, self.eps, self.one_sided) and rep.l1 == 1
        return bool(ok)


def primal_error(f, p: MultilinearPoly, one_sided: bool = False) -> Fraction:
    """Uniform error of ``p`` against ``f`` (one-sided: only ``p >= f - e`` is required on ``f^-1(1)``)."""
    g = RealFunction.of(f)
    vals = p.evaluate_on(g.points)
    worst = Fraction(0)
    for x, fx in zip(g.points, g.values):
        diff = vals[x] - fx
        if one_sided and fx == 1:
            worst = max(worst, -diff)
        else:
            worst = max(worst, abs(diff))
    return worst


def _check_size(g: RealFunction) -> None:
    if len(g.points) == 0:
        raise ValueError("empty domain")
    if len(g.points) > MAX_POINTS:
        raise ResourceError(f"domain of {len(g.points)} points exceeds the limit {MAX_POINTS} (ADEGLAB_MAX_POINTS)")


def _level_lp(g: RealFunction, levels: dict[int, Fraction], d: int, one_sided: bool) -> ErrorLP:
    ws = list(levels)
    cols = []  # (weight, sign)
    for w in ws:
        cols.append((w, 1))
        if not (one_sided and levels[w] == 1):
            cols.append((w, -1))
    top = max(ws)
    A, b = [], []
    for j in range(min(d, top) + 1):
        A.append([s * comb(w, j) for w, s in cols] + [0])
        b.append(0)
    A.append([1] * len(cols) + [1])
    b.append(1)
    c = [s * levels[w] for w, s in cols] + [0]
    res = solve(A, b, c, check=False)
    if res.status != "optimal":
        raise LPError(f"level program ended with status {res.status}")
    mass: dict[int, Fraction] = {}
    for (w, s), v in zip(cols, res.x):
        if v:
            mass[w] = mass.get(w, 0) + s * v
    psi = {}
    for w, v in mass.items():
        if v:
            share = v / comb(g.arity, w)
            for x in g.points:
                if popcount(x) == w:
                    psi[x] = share
    poly = MultilinearPoly.elementary(g.arity, {j: y for j, y in enumerate(res.y[:-1])})
    return ErrorLP(d, res.value, poly, RationalMeasure(g.arity, psi), "levels", res.pivots)


def _monomials_upto(g: RealFunction, d: int) -> list[int]:
    seen = set()
    for x in g.points:
        b = bits_of(x)
        for k in range(min(d, len(b)) + 1):
            for s in combinations(b, k):
                seen.add(sum(1 << i for i in s))
    return sorted(seen, key=lambda s: (popcount(s), s))


def _cube_lp(g: RealFunction, d: int, one_sided: bool) -> ErrorLP:
    cols = []
    for x, v in zip(g.points, g.values):
        cols.append((x, 1))
        if not (one_sided and v == 1):
            cols.append((x, -1))
    mons = _monomials_upto(g, d)
    A, b = [], []
    for s in mons:
        A.append([sign if x & s == s else 0 for x, sign in cols] + [0])
        b.append(0)
    A.append([1] * len(cols) + [1])
    b.append(1)
    table = g.as_dict()
    c = [sign * table[x] for x, sign in cols] + [0]
    res = solve(A, b, c, check=False)
    if res.status != "optimal":
        raise LPError(f"program ended with status {res.status}")
    psi: dict[int, Fraction] = {}
    for (x, sign), v in zip(cols, res.x):
        if v:
            psi[x] = psi.get(x, 0) + sign * v
    poly = MultilinearPoly(g.arity, dict(zip(mons, res.y[:-1])))
    return ErrorLP(d, res.value, poly, RationalMeasure(g.arity, psi), "cube", res.pivots)


def best_error(f, d: int, one_sided: bool = False, route: str = "auto") -> ErrorLP:
    """Least uniform error of a polynomial of degree ``<= d`` (with its dual witness)."""
    g = RealFunction.of(f)
    _check_size(g)
    if one_sided and not g.is_boolean():
        raise ValueError("one-sided approximation needs a Boolean function")
    if d < 0:
        raise ValueError("degree must be nonnegative")
    levels = g.levels() if route in ("auto", "levels") else None
    if route == "levels" and levels is None:
        raise ValueError("function is not symmetric on full weight levels")
    if levels is not None:
        return _level_lp(g, levels, d, one_sided)
    return _cube_lp(g, d, one_sided)


class _Profile:
    def __init__(self, f, one_sided: bool, route: str):
        self.g = RealFunction.of(f)
        self.one_sided = one_sided
        self.route = route
        self.cache: dict[int, ErrorLP] = {}

    def __call__(self, d: int) -> ErrorLP:
        if d not in self.cache:
            self.cache[d] = best_error(self.g, d, self.one_sided, self.route)
        return self.cache[d]


def _degree(f, eps, one_sided: bool, route: str, profile: _Profile | None = None) -> DegreeResult:
    g = RealFunction.of(f)
    eps = as_fraction(eps)
    if eps < 0:
        return DegreeResult(g.ident, eps, INF, one_sided)
    _check_size(g)
    prof = profile or _Profile(g, one_sided, route)
    lo, hi = 0, min(g.arity, max(popcount(x) for x in g.points))
    while lo < hi:
        mid = (lo + hi) // 2
        if prof(mid).error <= eps:
            hi = mid
        else:
            lo = mid + 1
    D = lo
    at = prof(D)
    witness = report = None
    if D >= 1:
        below = prof(D - 1)
        psi = below.witness
        if psi.l1() != 1:
            psi = psi.scale(1 / psi.l1())
        witness = psi
        report = witness_report(g, psi)
    return DegreeResult(
        g.ident, eps, D, one_sided, at.poly, primal_error(g, at.poly, one_sided), witness, report,
        {k: v.error for k, v in sorted(prof.cache.items())},
    )


def adeg(f, eps, route: str = "auto") -> DegreeResult:
    """Exact ``eps``-approximate degree with a primal certificate and a dual witness."""
    return _degree(f, eps, False, route)


def onedeg(f, eps, route: str = "auto") -> DegreeResult:
    """Exact one-sided ``eps``-approximate degree."""
    return _degree(f, eps, True, route)


def degree_table(f, eps_list, one_sided: bool = False, route: str = "auto") -> dict[Fraction, DegreeResult]:
    """Degrees at several error levels, sharing the per-degree programs."""
    prof = _Profile(f, one_sided, route)
    return {Fraction(e): _degree(f, e, one_sided, route, prof) for e in eps_list}


def dual_witness(f, d: int, one_sided: bool = False, route: str = "auto") -> tuple[RationalMeasure, WitnessReport, Fraction]:
    """Optimal witness orthogonal to all monomials of degree ``< d``.

    Returns ``(psi, report, eps_star)`` with ``||psi||_1 = 1`` whenever the
    optimum is positive; degree ``>= d`` holds for every ``eps < eps_star``.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    g = RealFunction.of(f)
    sol = best_error(g, d - 1, one_sided, route)
    psi = sol.witness
    if not psi.is_zero() and psi.l1() != 1:
        psi = psi.scale(1 / psi.l1())
    return psi, witness_report(g, psi), sol.error


def restricted(f, hi: int, lo: int = 0) -> PartialFunction:
    return restrict_weight(f, WeightWindow(lo, hi))
