"""Multilinear polynomials, sparse rational measures and orthogonal content.

Monomials are bit masks over the variables; a measure is a sparse map from
points (also bit masks) to exact rationals.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations, product
from math import comb
from pathlib import Path
from typing import Iterable, Mapping

from .hypercube import MAX_ARITY, ResourceError, point_to_str, popcount, str_to_point

INF = math.inf
NEG_INF = -math.inf


def bits_of(x: int) -> list[int]:
    out = []
    i = 0
    while x:
        if x & 1:
            out.append(i)
        x >>= 1
        i += 1
    return out


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    return reduce(math.lcm, (Fraction(v).denominator for v in values), 1)


def as_fraction(v) -> Fraction:
    if isinstance(v, float):
        raise TypeError("floats are not accepted where exact rationals are required")
    return Fraction(v)


@dataclass(frozen=True)
class MultilinearPoly:
    arity: int
    coeffs: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for s, c in self.coeffs.items():
            c = as_fraction(c)
            if s >> self.arity:
                raise ValueError(f"monomial {s:b} outside arity {self.arity}")
            if c:
                clean[s] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def constant(cls, arity: int, c) -> "MultilinearPoly":
        return cls(arity, {0: Fraction(c)})

    @classmethod
    def variable(cls, arity: int, i: int) -> "MultilinearPoly":
        return cls(arity, {1 << i: Fraction(1)})

    @classmethod
    def monomial(cls, arity: int, s: Iterable[int], c=1) -> "MultilinearPoly":
        return cls(arity, {sum(1 << i for i in s): Fraction(c)})

    @classmethod
    def elementary(cls, arity: int, coeffs_by_degree: Mapping[int, Fraction]) -> "MultilinearPoly":
        """``sum_j c_j e_j(x)`` where ``e_j`` is the elementary symmetric polynomial."""
        out = {}
        for j, c in coeffs_by_degree.items():
            if c:
                for s in combinations(range(arity), j):
                    out[sum(1 << i for i in s)] = Fraction(c)
        return cls(arity, out)

    @property
    def degree(self):
        if not self.coeffs:
            return NEG_INF
        return max(popcount(s) for s in self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x: int) -> Fraction:
        return sum((c for s, c in self.coeffs.items() if x & s == s), Fraction(0))

    def __add__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        out = dict(self.coeffs)
        for s, c in other.coeffs.items():
            out[s] = out.get(s, 0) + c
        return MultilinearPoly(self.arity, out)

    def __neg__(self) -> "MultilinearPoly":
        return MultilinearPoly(self.arity, {s: -c for s, c in self.coeffs.items()})

    def __sub__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        return self + (-other)

    def scale(self, a) -> "MultilinearPoly":
        a = as_fraction(a)
        return MultilinearPoly(self.arity, {s: a * c for s, c in self.coeffs.items()})

    def __mul__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        out: dict[int, Fraction] = defaultdict(Fraction)
        for s, a in self.coeffs.items():
            for t, b in other.coeffs.items():
                out[s | t] += a * b
        return MultilinearPoly(self.arity, out)

    def evaluate_all(self) -> list[Fraction]:
        """Values at every point of ``{0,1}^arity`` (subset-sum transform)."""
        if self.arity > 20:
            raise ResourceError("evaluate_all is limited to 20 variables")
        den = lcm_of_denominators(self.coeffs.values())
        vals = [0] * (1 << self.arity)
        for s, c in self.coeffs.items():
            vals[s] = int(c * den)
        for i in range(self.arity):
            bit = 1 << i
            for x in range(1 << self.arity):
                if x & bit:
                    vals[x] += vals[x ^ bit]
        return [Fraction(v, den) for v in vals]

    def evaluate_on(self, points: Iterable[int]) -> dict[int, Fraction]:
        pts = list(points)
        if self.arity <= 16 and len(pts) * max(len(self.coeffs), 1) > (1 << self.arity) * self.arity:
            allv = self.evaluate_all()
            return {x: allv[x] for x in pts}
        return {x: self(x) for x in pts}


@dataclass(frozen=True)
class RationalMeasure:
    """Sparse rational-valued function on ``{0,1}^arity``.

    ``block`` optionally records a product structure ``({0,1}^block)^theta``
    with ``arity = block * theta``; block ``i`` occupies bits
    ``i*block .. i*block+block-1``.
    """

    arity: int
    values: Mapping[int, Fraction] = field(default_factory=dict)
    block: int | None = None

    def __post_init__(self):
        clean = {}
        for x, v in self.values.items():
            v = as_fraction(v)
            if x < 0 or x >> self.arity:
                raise ValueError(f"point {x} outside arity {self.arity}")
            if v:
                clean[x] = v
        object.__setattr__(self, "values", dict(sorted(clean.items())))
        if self.block is not None and (self.block <= 0 or self.arity % self.block):
            raise ValueError("block size must divide the arity")

    @classmethod
    def point_mass(cls, arity: int, x: int, v=1) -> "RationalMeasure":
        return cls(arity, {x: Fraction(v)})

    @property
    def theta(self) -> int | None:
        return None if self.block is None else self.arity // self.block

    def __getitem__(self, x: int) -> Fraction:
        return self.values.get(x, Fraction(0))

    def __len__(self) -> int:
        return len(self.values)

    def items(self):
        return self.values.items()

    def support(self) -> list[int]:
        return list(self.values)

    def is_zero(self) -> bool:
        return not self.values

    def l1(self) -> Fraction:
        return sum((abs(v) for v in self.values.values()), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.values.values(), Fraction(0))

    def max_weight(self) -> int:
        return max((popcount(x) for x in self.values), default=0)

    def mass_where(self, pred) -> Fraction:
        return sum((v for x, v in self.values.items() if pred(x)), Fraction(0))

    def abs_mass_where(self, pred) -> Fraction:
        return sum((abs(v) for x, v in self.values.items() if pred(x)), Fraction(0))

    def min_value(self) -> Fraction:
        return min(self.values.values(), default=Fraction(0))

    def _combine(self, other: "RationalMeasure", sign: int) -> "RationalMeasure":
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        out = dict(self.values)
        for x, v in other.values.items():
            out[x] = out.get(x, 0) + sign * v
        block = self.block if self.block == other.block else None
        return RationalMeasure(self.arity, out, block)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, a) -> "RationalMeasure":
        a = as_fraction(a)
        return RationalMeasure(self.arity, {x: a * v for x, v in self.values.items()}, self.block)

    def restrict(self, pred) -> "RationalMeasure":
        return RationalMeasure(self.arity, {x: v for x, v in self.values.items() if pred(x)}, self.block)

    def with_block(self, block: int | None) -> "RationalMeasure":
        return RationalMeasure(self.arity, self.values, block)

    def to_text(self) -> str:
        if self.block is not None:
            head = f"n={self.block} theta={self.theta}"
        else:
            head = f"n={self.arity}"
        lines = [head]
        for x, v in self.values.items():
            lines.append(f"{point_to_str(x, self.arity)} {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RationalMeasure":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
        if not lines or not lines[0].startswith("n="):
            raise ValueError("measure file must start with 'n=<arity>'")
        head = dict(tok.split("=", 1) for tok in lines[0].split())
        n = int(head["n"])
        theta = int(head.get("theta", 1))
        arity = n * theta
        vals = {}
        for ln in lines[1:]:
            pt, val = ln.split()
            if len(pt) != arity:
                raise ValueError(f"point {pt!r} has length {len(pt)}, expected {arity}")
            x = str_to_point(pt)
            if x in vals:
                raise ValueError(f"duplicate point {pt}")
            vals[x] = Fraction(val)
        return cls(arity, vals, n if "theta" in head else None)


def read_measure(path: str | Path) -> RationalMeasure:
    return RationalMeasure.from_text(Path(path).read_text())


def write_measure(m: RationalMeasure, path: str | Path) -> None:
    Path(path).write_text(m.to_text())


def inner_product(m: RationalMeasure, p: MultilinearPoly) -> Fraction:
    if m.arity != p.arity:
        raise ValueError(f"arity mismatch: measure {m.arity}, polynomial {p.arity}")
    if len(m) * len(p.coeffs) > 4 * (1 << min(p.arity, 22)) and p.arity <= 16:
        allv = p.evaluate_all()
        return sum((v * allv[x] for x, v in m.items()), Fraction(0))
    return sum((v * p(x) for x, v in m.items()), Fraction(0))


def correlation(m: RationalMeasure, f) -> Fraction:
    """``<f, m>`` for a Boolean function given as a callable or dict on points."""
    get = f.get if isinstance(f, dict) else f
    return sum((v * get(x) for x, v in m.items()), Fraction(0))


def _integer_values(m: RationalMeasure) -> list[tuple[int, int]]:
    den = lcm_of_denominators(m.values.values())
    return [(x, int(v * den)) for x, v in m.items()]


def moments(m: RationalMeasure, d: int) -> dict[int, int]:
    """Nonzero inner products (scaled by a common positive factor) with the degree-``d`` monomials."""
    acc: dict[int, int] = defaultdict(int)
    for x, v in _integer_values(m):
        b = bits_of(x)
        if len(b) < d:
            continue
        for s in combinations(b, d):
            acc[sum(1 << i for i in s)] += v
    return {s: v for s, v in acc.items() if v}


def orth(m: RationalMeasure, upto: int | None = None):
    """Orthogonal content: least ``d`` with a degree-``d`` monomial not orthogonal to ``m``.

    Returns ``INF`` for the zero measure.  With ``upto`` given, the scan stops
    after degree ``upto`` and returns ``upto + 1`` if all those moments vanish
    (a lower bound that is exact whenever it is at most ``upto``).
    """
    if m.is_zero():
        return INF
    top = m.max_weight()
    if upto is not None:
        top = min(top, upto)
    if m.arity <= 14 and len(m) > (1 << m.arity) // 8:
        return _orth_dense(m, top, upto)
    for d in range(top + 1):
        if moments(m, d):
            return d
    if upto is not None and upto < m.max_weight():
        return upto + 1
    raise AssertionError("nonzero measure orthogonal to every monomial on its support")


def _orth_dense(m: RationalMeasure, top: int, upto):
    n = m.arity
    g = [0] * (1 << n)
    for x, v in _integer_values(m):
        g[x] = v
    for i in range(n):
        bit = 1 << i
        for x in range(1 << n):
            if not x & bit:
                g[x] += g[x | bit]
    best = INF
    for s, v in enumerate(g):
        if v:
            best = min(best, popcount(s))
    if upto is not None and best > upto:
        return upto + 1
    return best


def orth_at_least(m: RationalMeasure, d: int) -> bool:
    """True iff every monomial of degree < d is orthogonal to ``m``."""
    if d <= 0 or m.is_zero():
        return True
    return orth(m, upto=d - 1) >= d


def tensor(a: RationalMeasure, b: RationalMeasure) -> RationalMeasure:
    """``(a (x) b)(x, y) = a(x) b(y)``; ``a`` occupies the low bits."""
    out = {}
    for x, u in a.items():
        for y, v in b.items():
            out[x | (y << a.arity)] = u * v
    return RationalMeasure(a.arity + b.arity, out)


def tensor_all(factors: list[RationalMeasure]) -> RationalMeasure:
    """Tensor product of a list of measures; equal factor sizes set the block structure."""
    if not factors:
        return RationalMeasure(0, {0: Fraction(1)})
    out = factors[0]
    for f in factors[1:]:
        out = tensor(out, f)
    sizes = {f.arity for f in factors}
    block = factors[0].arity if len(sizes) == 1 and factors[0].arity else None
    return out.with_block(block)


def orth_of_product(factors: list[RationalMeasure]):
    """Orthogonal content of a tensor product without materializing it."""
    return sum(orth(f) for f in factors)


# ---------------------------------------------------------------- univariate


@dataclass(frozen=True)
class BinomialPoly:
    """Univariate polynomial ``sum_j c_j * C(t, j)`` in the binomial basis."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        c = list(Fraction(v) for v in self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        total, b = Fraction(0), Fraction(1)
        for j, c in enumerate(self.coeffs):
            total += c * b
            b = b * (t - j) / (j + 1)
        return total

    def to_monomial(self) -> list[Fraction]:
        """Coefficients ``a_i`` of ``sum_i a_i t^i``."""
        out = [Fraction(0)] * max(len(self.coeffs), 1)
        falling = [Fraction(1)]
        for j, c in enumerate(self.coeffs):
            if j:
                nxt = [Fraction(0)] * (len(falling) + 1)
                for i, a in enumerate(falling):
                    nxt[i + 1] += a
                    nxt[i] -= (j - 1) * a
                falling = nxt
            fact = math.factorial(j)
            for i, a in enumerate(falling):
                out[i] += c * a / fact
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return out


def interpolate_nodes(values: list[Fraction]) -> BinomialPoly:
    """Unique polynomial of degree <= len-1 through ``(t, values[t])`` for ``t = 0..len-1``."""
    diffs = [Fraction(v) for v in values]
    coeffs = []
    while diffs:
        coeffs.append(diffs[0])
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
    return BinomialPoly(tuple(coeffs))


def level_averages(p: MultilinearPoly, enumerate_points: bool = False) -> list[Fraction]:
    """Average of ``p`` over each weight level ``t = 0..n``."""
    n = p.arity
    if enumerate_points:
        if n > 16:
            raise ResourceError("enumeration limited to 16 variables")
        vals = p.evaluate_all()
        sums = [Fraction(0)] * (n + 1)
        for x, v in enumerate(vals):
            sums[popcount(x)] += v
        return [s / comb(n, t) for t, s in enumerate(sums)]
    by_deg: dict[int, Fraction] = defaultdict(Fraction)
    for s, c in p.coeffs.items():
        by_deg[popcount(s)] += c
    return [sum((c * comb(t, j) / comb(n, j) for j, c in by_deg.items()), Fraction(0)) for t in range(n + 1)]


def symmetrize(p: MultilinearPoly, enumerate_points: bool | None = None) -> BinomialPoly:
    if p.arity > MAX_ARITY:
        raise ResourceError(f"arity {p.arity} exceeds {MAX_ARITY}")
    if enumerate_points is None:
        enumerate_points = p.arity <= 10
    return interpolate_nodes(level_averages(p, enumerate_points))


# ---------------------------------------------------------------- block / vector symmetrization


def block_points(N: int, theta: int) -> list[tuple[int, ...]]:
    """All tuples in ``V^theta`` with ``V = {0^N, e_1..e_N}``; entry 0 is ``0^N`` and ``j`` is ``e_j``."""
    return list(product(range(N + 1), repeat=theta))


def block_tuple_to_point(v: tuple[int, ...], N: int) -> int:
    x = 0
    for i, j in enumerate(v):
        if j:
            x |= 1 << (i * N + j - 1)
    return x


def tuple_sum(v: tuple[int, ...], N: int) -> tuple[int, ...]:
    s = [0] * N
    for j in v:
        if j:
            s[j - 1] += 1
    return tuple(s)


@dataclass(frozen=True)
class VectorSymmetrized:
    N: int
    theta: int
    values: Mapping[tuple[int, ...], Fraction]
    coeffs: Mapping[tuple[int, ...], Fraction]

    @property
    def degree(self):
        nz = [sum(a) for a, c in self.coeffs.items() if c]
        return max(nz) if nz else NEG_INF

    def __call__(self, v: tuple[int, ...]) -> Fraction:
        total = Fraction(0)
        for a, c in self.coeffs.items():
            term = c
            for vi, ai in zip(v, a):
                term *= comb(vi, ai) if vi >= 0 else Fraction(math.prod(vi - i for i in range(ai)), math.factorial(ai))
            total += term
        return total


def simplex_grid(N: int, theta: int) -> list[tuple[int, ...]]:
    return [v for v in product(range(theta + 1), repeat=N) if sum(v) <= theta]


def vector_symmetrize(p: MultilinearPoly, N: int, theta: int) -> VectorSymmetrized:
    """Average ``p`` over tuples in ``V^theta`` with a given coordinate sum, and fit a polynomial.

    The fitted polynomial is expressed in the basis ``prod_j C(v_j, a_j)``
    with ``|a| <= theta``; this basis is triangular on the grid
    ``{v in N^N : |v| <= theta}``, so the fit is exact and unique.
    """
    if p.arity != N * theta:
        raise ValueError("polynomial arity must equal N * theta")
    if (N + 1) ** theta > 10 ** 6:
        raise ResourceError("V^theta too large to enumerate")
    sums: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
    counts: dict[tuple[int, ...], int] = defaultdict(int)
    for v in block_points(N, theta):
        key = tuple_sum(v, N)
        sums[key] += p(block_tuple_to_point(v, N))
        counts[key] += 1
    values = {k: sums[k] / counts[k] for k in sums}
    coeffs = {}
    for a in simplex_grid(N, theta):
        total = Fraction(0)
        for b in product(*(range(ai + 1) for ai in a)):
            sign = (-1) ** (sum(a) - sum(b))
            mult = math.prod(comb(ai, bi) for ai, bi in zip(a, b))
            total += sign * mult * values[b]
        if total:
            coeffs[a] = total
    return VectorSymmetrized(N, theta, values, coeffs)


def interpolate_downclosed(values: Mapping[int, Fraction], arity: int) -> MultilinearPoly:
    """Multilinear interpolant of a function given on a down-closed set of points.

    On a down-closed set the monomials indexed by the set itself form a basis,
    and the coefficient of ``S`` is ``sum_{T subset S} (-1)^{|S-T|} f(T)``.
    """
    pts = set(values)
    coeffs = {}
    for s in pts:
        b = bits_of(s)
        total = Fraction(0)
        for r in range(len(b) + 1):
            for sub in combinations(b, r):
                t = sum(1 << i for i in sub)
                if t not in pts:
                    raise ValueError("point set is not down-closed")
                total += (-1) ** (len(b) - r) * values[t]
        if total:
            coeffs[s] = total
    return MultilinearPoly(arity, coeffs)
