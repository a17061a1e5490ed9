"""Colorings of the k-subsets of [n] and their balance.

A coloring assigns one of r colors to every k-subset.  It is eps-balanced on
a set A when every color class holds between (1-eps)/r and (1+eps)/r of the
k-subsets of A, and (eps, delta, m)-balanced when, for every l >= m, all but
a delta fraction of the l-subsets A are eps-balanced.

Subsets are bitmasks over positions 0..n-1 and are enumerated in colex order
(increasing integer value).  Colors are 1..r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .hypercube import ResourceError, popcount
from .numtheory import ParameterError, ResidueMultiset, build_lowdisc_set, discrepancy

EXHAUSTIVE_BUDGET = 10**8


def k_subsets(n: int, k: int) -> np.ndarray:
    """All k-subsets of [n] as bitmasks, in colex order."""
    masks = [sum(1 << i for i in c) for c in combinations(range(n), k)]
    return np.array(sorted(masks), dtype=np.int64)


def _as_mask(S) -> int:
    if isinstance(S, (int, np.integer)):
        return int(S)
    m = 0
    for i in S:
        m |= 1 << int(i)
    return m


def _bit_matrix(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)


@dataclass(frozen=True)
class Coloring:
    """A coloring of C([n], k) with r colors.

    Seeded either by integers ``z`` (one per position, color
    1 + (sum_{i in S} z_i mod r)) or by an explicit ``table`` listing the
    color of each k-subset in colex order.
    """

    n: int
    k: int
    r: int
    z: tuple[int, ...] | None = None
    table: tuple[int, ...] | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not (self.n >= self.k >= 1) or self.r < 1:
            raise ParameterError(f"need n >= k >= 1 and r >= 1, got n={self.n} k={self.k} r={self.r}")
        if (self.z is None) == (self.table is None):
            raise ParameterError("give exactly one of z or table")
        if self.z is not None and len(self.z) != self.n:
            raise ParameterError(f"z has {len(self.z)} entries, expected {self.n}")
        if self.table is not None:
            if len(self.table) != math.comb(self.n, self.k):
                raise ParameterError("table length must be C(n, k)")
            if any(not 1 <= c <= self.r for c in self.table):
                raise ParameterError("table colors must lie in 1..r")

    @classmethod
    def from_multiset(cls, zs: ResidueMultiset | Sequence[int], k: int, r: int) -> "Coloring":
        elems = zs.elements() if isinstance(zs, ResidueMultiset) else list(zs)
        return cls(len(elems), k, r, z=tuple(int(v) for v in elems))

    @property
    def subsets(self) -> np.ndarray:
        if "subsets" not in self._cache:
            self._cache["subsets"] = k_subsets(self.n, self.k)
        return self._cache["subsets"]

    @property
    def colors(self) -> np.ndarray:
        """Color of every k-subset, aligned with ``subsets``."""
        if "colors" not in self._cache:
            if self.table is not None:
                cols = np.array(self.table, dtype=np.int64)
            else:
                bits = _bit_matrix(self.subsets, self.n)
                z = np.array([v % self.r for v in self.z], dtype=np.int64)
                cols = 1 + (bits @ z) % self.r
            self._cache["colors"] = cols
        return self._cache["colors"]

    def class_of(self, color: int) -> list[int]:
        """Masks of the k-subsets with the given color."""
        return [int(s) for s, c in zip(self.subsets, self.colors) if c == color]

    def class_sizes(self) -> list[int]:
        counts = np.bincount(self.colors, minlength=self.r + 1)
        return [int(v) for v in counts[1:]]

    def recolor(self, mapping: dict[int, int]) -> "Coloring":
        return Coloring(self.n, self.k, self.r, table=tuple(mapping.get(int(c), int(c)) for c in self.colors))

    def to_json(self) -> dict:
        out = {"n": self.n, "k": self.k, "r": self.r}
        if self.z is not None:
            out["z"] = list(self.z)
        else:
            out["table"] = list(self.table)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Coloring":
        z = tuple(d["z"]) if "z" in d else None
        table = tuple(d["table"]) if "table" in d else None
        return cls(d["n"], d["k"], d["r"], z=z, table=table)


def color_of(c: Coloring, S) -> int:
    """Color of the k-subset S (a bitmask or an iterable of 0-based positions)."""
    mask = _as_mask(S)
    if popcount(mask) != c.k or mask >> c.n:
        raise ParameterError(f"S must be a {c.k}-subset of [{c.n}]")
    if c.z is not None:
        return 1 + sum(c.z[i] for i in range(c.n) if mask >> i & 1) % c.r
    idx = int(np.searchsorted(c.subsets, mask))
    return int(c.colors[idx])


@dataclass
class LevelStats:
    level: int
    total: int  # number of l-subsets examined
    failures: int  # how many were not eps-balanced
    worst: Fraction  # largest eps at which some examined A is unbalanced

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.failures, self.total) if self.total else Fraction(0)


@dataclass
class BalanceCert:
    eps: Fraction
    delta: Fraction
    m: int
    mode: str  # "exhaustive" or "monte-carlo"
    levels: list[LevelStats]
    samples: int | None = None
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return all(lv.fraction <= self.delta for lv in self.levels)

    @property
    def worst_fraction(self) -> Fraction:
        return max((lv.fraction for lv in self.levels), default=Fraction(0))

    def to_json(self) -> dict:
        return {
            "eps": _q(self.eps),
            "delta": _q(self.delta),
            "m": self.m,
            "mode": self.mode,
            "samples": self.samples,
            "seed": self.seed,
            "passed": self.passed,
            "levels": [
                {"level": lv.level, "total": lv.total, "failures": lv.failures, "fraction": _q(lv.fraction), "worst_eps": _q(lv.worst)}
                for lv in self.levels
            ],
        }


def _q(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _class_counts(c: Coloring, A: np.ndarray) -> np.ndarray:
    """counts[a, i] = number of k-subsets of A[a] with color i+1."""
    onehot = np.zeros((len(c.subsets), c.r), dtype=np.int64)
    onehot[np.arange(len(c.subsets)), c.colors - 1] = 1
    out = np.empty((len(A), c.r), dtype=np.int64)
    step = max(1, 4_000_000 // max(1, len(c.subsets)))
    for lo in range(0, len(A), step):
        block = A[lo : lo + step]
        inside = (c.subsets[None, :] & ~block[:, None]) == 0
        out[lo : lo + step] = inside.astype(np.int64) @ onehot
    return out


def required_eps(c: Coloring, A: np.ndarray) -> list[Fraction]:
    """For each l-subset A, the least eps at which the coloring is eps-balanced on A."""
    counts = _class_counts(c, A)
    out = []
    for row, a in zip(counts, A):
        total = math.comb(popcount(int(a)), c.k)
        if total == 0:
            out.append(Fraction(0))
            continue
        dev = max(abs(c.r * int(v) - total) for v in row)
        out.append(Fraction(dev, total))
    return out


def balanced_on(c: Coloring, A, eps) -> bool:
    a = np.array([_as_mask(A)], dtype=np.int64)
    return required_eps(c, a)[0] <= Fraction(eps)


def _level_sets(n: int, level: int) -> np.ndarray:
    return k_subsets(n, level)


def exhaustive_cost(n: int, k: int, m: int) -> int:
    return sum(math.comb(n, l) * math.comb(l, k) for l in range(m, n + 1))


def balance_profile(c: Coloring, m: int) -> dict[int, list[Fraction]]:
    """Sorted required-eps values of every l-subset, for l = m..n."""
    if exhaustive_cost(c.n, c.k, m) > EXHAUSTIVE_BUDGET:
        raise ResourceError("exhaustive balance check exceeds the evaluation budget")
    return {l: sorted(required_eps(c, _level_sets(c.n, l))) for l in range(m, c.n + 1)}


def delta_for_eps(profile: dict[int, list[Fraction]], eps) -> Fraction:
    """Smallest delta such that the profiled coloring is (eps, delta, m)-balanced."""
    eps = Fraction(eps)
    worst = Fraction(0)
    for vals in profile.values():
        bad = sum(1 for v in vals if v > eps)
        worst = max(worst, Fraction(bad, len(vals)))
    return worst


def eps_delta_frontier(profile: dict[int, list[Fraction]]) -> list[tuple[Fraction, Fraction]]:
    """All Pareto-optimal (eps, delta) pairs for the profiled coloring."""
    cands = sorted({Fraction(0)} | {v for vals in profile.values() for v in vals})
    out = []
    for e in cands:
        d = delta_for_eps(profile, e)
        if not out or d < out[-1][1]:
            out.append((e, d))
    return out


def verify_balance(
    c: Coloring,
    eps,
    delta,
    m: int,
    mode: str = "exhaustive",
    samples: int = 2000,
    seed: int = 0,
) -> BalanceCert:
    """Measure, for each l in m..n, the fraction of l-subsets on which c is not eps-balanced."""
    eps, delta = Fraction(eps), Fraction(delta)
    if not c.k <= m <= c.n:
        raise ParameterError(f"need k <= m <= n, got m={m}")
    levels = []
    if mode == "exhaustive":
        if exhaustive_cost(c.n, c.k, m) > EXHAUSTIVE_BUDGET:
            raise ResourceError("exhaustive balance check exceeds the evaluation budget")
        for l in range(m, c.n + 1):
            req = required_eps(c, _level_sets(c.n, l))
            levels.append(LevelStats(l, len(req), sum(1 for v in req if v > eps), max(req)))
        return BalanceCert(eps, delta, m, mode, levels)
    if mode == "monte-carlo":
        rng = np.random.Generator(np.random.Philox(seed))
        for l in range(m, c.n + 1):
            A = np.empty(samples, dtype=np.int64)
            for s in range(samples):
                idx = rng.choice(c.n, size=l, replace=False)
                A[s] = int(np.sum(np.left_shift(1, idx)))
            req = required_eps(c, A)
            levels.append(LevelStats(l, samples, sum(1 for v in req if v > eps), max(req)))
        return BalanceCert(eps, delta, m, mode, levels, samples, seed)
    raise ParameterError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class Guarantee:
    eps: float
    delta: float
    disc: float
    disc_upper: Fraction

    def as_fractions(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.eps), Fraction(self.delta)


def guarantee_formula(disc: float, r: int, m: int, k: int, beta: float, zeta: float) -> tuple[float, float]:
    """(eps, delta) from the discrepancy-to-balance bound at a given discrepancy value."""
    eps = 4 * r * r * k * math.exp(-(m // k) * zeta * zeta / 8) + r * (disc + beta + zeta) ** k
    delta = 4 * r * math.exp(-m * beta * beta / 8)
    return eps, delta


def balance_guarantee(Z: ResidueMultiset | Sequence[int], r: int, m: int, k: int, beta: float, zeta: float) -> Guarantee:
    """Guaranteed (eps, delta) for the sum-mod-r coloring seeded by Z, from its measured r-discrepancy.

    The upper end of the discrepancy enclosure is used and the result is
    padded by a relative 1e-12, so float rounding can only loosen it.
    """
    zs = Z if isinstance(Z, ResidueMultiset) else ResidueMultiset.of(r, Z)
    if zs.modulus != r:
        zs = ResidueMultiset.of(r, zs.elements())
    n = len(zs)
    if not (n >= m >= k >= 1) or r < 2 or not (0 <= beta <= 1 and 0 <= zeta <= 1):
        raise ParameterError("need n >= m >= k >= 1, r >= 2 and beta, zeta in [0, 1]")
    d = discrepancy(zs)
    eps, delta = guarantee_formula(float(d.upper), r, m, k, beta, zeta)
    return Guarantee(eps * (1 + 1e-12), delta * (1 + 1e-12), d.value, d.upper)


def existence_check(n: int, m: int, k: int, r: int, eps, delta) -> bool:
    """Whether C(m,k) >= (3r/eps^2) ln(2rn/delta), decided exactly.

    The comparison is against a logarithm of a rational other than 1, which
    is irrational, so it never ties; precision is raised until the interval
    enclosure separates the two sides.
    """
    import mpmath

    eps, delta = Fraction(eps), Fraction(delta)
    if not (0 < eps <= 1 and 0 < delta <= 1):
        raise ParameterError("eps and delta must lie in (0, 1]")
    lhs = Fraction(math.comb(m, k)) * eps * eps / (3 * r)
    arg = Fraction(2 * r * n) / delta
    prec = 64
    while prec <= 1 << 16:
        with mpmath.workprec(prec):
            left = mpmath.mpf(lhs.numerator) / lhs.denominator
            log = mpmath.log(mpmath.mpf(arg.numerator) / arg.denominator)
            slack = mpmath.ldexp(abs(left) + abs(log) + 1, 8 - prec)
            if left - log > slack:
                return True
            if log - left > slack:
                return False
        prec *= 2
    raise ArithmeticError("could not separate the two sides")


def random_coloring(n: int, k: int, r: int, seed: int = 0) -> Coloring:
    """Uniformly random table coloring from a counter-based generator."""
    rng = np.random.Generator(np.random.Philox(seed))
    table = rng.integers(1, r + 1, size=math.comb(n, k))
    return Coloring(n, k, r, table=tuple(int(v) for v in table))


@dataclass(frozen=True)
class ExplicitColoring:
    n_prime: int
    coloring: Coloring
    base: ResidueMultiset
    copies: int
    branch: str


def explicit_coloring(n: int, m: int, k: int, r: int) -> ExplicitColoring:
    """Sum-mod-r coloring seeded by floor(n/|S|) copies of a low-discrepancy set S modulo r."""
    if not (n / 2 >= m >= k >= 1) or r < 2:
        raise ParameterError(f"need n/2 >= m >= k >= 1 and r >= 2, got n={n} m={m} k={k} r={r}")
    low = build_lowdisc_set(r, n)
    S = low.multiset
    copies = n // len(S)
    Z = S.replicate(copies)
    n_prime = len(Z)
    assert n / 2 < n_prime <= n
    return ExplicitColoring(n_prime, Coloring.from_multiset(Z, k, r), S, copies, low.branch)


def subset_sum_counts(z: Sequence[int], k: int, r: int) -> list[int]:
    """counts[a] = number of k-subsets of positions whose z-sum is a mod r."""
    table = [[0] * r for _ in range(k + 1)]
    table[0][0] = 1
    for v in z:
        v %= r
        for j in range(min(k, len(z)), 0, -1):
            prev = table[j - 1]
            row = table[j]
            for a in range(r):
                if prev[a]:
                    row[(a + v) % r] += prev[a]
    return table[k]


def equipartition_bound(disc: float, r: int, k: int, l: int, alpha: float) -> float:
    return 4 * r * k * math.exp(-(l // k) * alpha * alpha / 8) + (disc + alpha) ** k
