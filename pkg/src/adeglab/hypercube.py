"""Boolean functions on the hypercube, DNF formulas and weight restrictions.

Inputs are indexed little-endian: bit ``i`` of the integer ``x`` is the
variable ``x_{i+1}``.  Total truth tables are capped at 24 input bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_ARITY = 24


class ResourceError(RuntimeError):
    """Raised when a request exceeds the desk-scale size guards."""


def popcount(x: int) -> int:
    return bin(x).count("1")


def _check_arity(n: int) -> None:
    if n < 0:
        raise ValueError(f"negative arity {n}")
    if n > MAX_ARITY:
        raise ResourceError(f"arity {n} exceeds the cap of {MAX_ARITY}")


def _weights(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    w = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        w += (idx >> i) & 1
    return w


def points_of_weight(n: int, lo: int, hi: int | None = None) -> list[int]:
    """All points of ``{0,1}^n`` with ``lo <= |x| <= hi``, in increasing order."""
    hi = lo if hi is None else hi
    from itertools import combinations

    out = []
    for w in range(max(lo, 0), min(hi, n) + 1):
        for c in combinations(range(n), w):
            out.append(sum(1 << i for i in c))
    return sorted(out)


@dataclass(frozen=True)
class TruthTable:
    """Total Boolean function on ``{0,1}^arity`` stored as packed bits."""

    arity: int
    packed: bytes = field(repr=False)

    @classmethod
    def from_values(cls, arity: int, values: Iterable[int]) -> "TruthTable":
        _check_arity(arity)
        v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.uint8)
        if v.shape != (1 << arity,):
            raise ValueError(f"expected {1 << arity} entries, got {v.shape}")
        if np.any(v > 1):
            raise ValueError("truth table entries must be 0 or 1")
        return cls(arity, np.packbits(v, bitorder="little").tobytes())

    @classmethod
    def from_function(cls, arity: int, fn) -> "TruthTable":
        return cls.from_values(arity, [1 if fn(x) else 0 for x in range(1 << arity)])

    @property
    def values(self) -> np.ndarray:
        bits = np.unpackbits(np.frombuffer(self.packed, dtype=np.uint8), bitorder="little")
        return bits[: 1 << self.arity]

    def __call__(self, x: int) -> int:
        return (self.packed[x >> 3] >> (x & 7)) & 1

    def __len__(self) -> int:
        return 1 << self.arity

    def complement(self) -> "TruthTable":
        return TruthTable.from_values(self.arity, 1 - self.values)

    def ones(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.values)]

    def is_symmetric(self) -> bool:
        w = _weights(self.arity)
        v = self.values
        for t in range(self.arity + 1):
            level = v[w == t]
            if level.min() != level.max():
                return False
        return True

    def to_partial(self) -> "PartialFunction":
        return PartialFunction(self.arity, tuple(range(1 << self.arity)), tuple(int(b) for b in self.values))

    def to_text(self) -> str:
        return f"n={self.arity}\n" + "".join(str(int(b)) for b in self.values) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TruthTable":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
        if len(lines) < 1 or not lines[0].startswith("n="):
            raise ValueError("truth-table file must start with 'n=<arity>'")
        n = int(lines[0][2:])
        body = "".join(lines[1:])
        if len(body) != 1 << n or set(body) - {"0", "1"}:
            raise ValueError(f"expected {1 << n} characters of 0/1 after the header")
        return cls.from_values(n, [int(c) for c in body])


@dataclass(frozen=True)
class WeightWindow:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 0 or self.lo > self.hi:
            raise ValueError(f"bad weight window [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class PartialFunction:
    """Boolean function on a subset of ``{0,1}^arity``, stored as sorted points."""

    arity: int
    points: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.points) != len(self.values):
            raise ValueError("points and values differ in length")
        if any(a >= b for a, b in zip(self.points, self.points[1:])):
            order = sorted(range(len(self.points)), key=self.points.__getitem__)
            pts = tuple(self.points[i] for i in order)
            if any(a == b for a, b in zip(pts, pts[1:])):
                raise ValueError("duplicate points in partial function")
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "values", tuple(self.values[i] for i in order))

    @classmethod
    def from_pairs(cls, arity: int, pairs: Iterable[tuple[int, int]]) -> "PartialFunction":
        pairs = sorted(pairs)
        return cls(arity, tuple(p for p, _ in pairs), tuple(int(v) for _, v in pairs))

    def __len__(self) -> int:
        return len(self.points)

    def items(self):
        return zip(self.points, self.values)

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.points, self.values))

    def complement(self) -> "PartialFunction":
        return PartialFunction(self.arity, self.points, tuple(1 - v for v in self.values))

    def weight_levels(self) -> dict[int, list[int]]:
        levels: dict[int, list[int]] = {}
        for x in self.points:
            levels.setdefault(popcount(x), []).append(x)
        return levels

    def is_symmetric(self) -> bool:
        """True when the domain is a union of full weight levels and values depend only on weight."""
        from math import comb

        seen: dict[int, int] = {}
        counts: dict[int, int] = {}
        for x, v in self.items():
            w = popcount(x)
            if seen.setdefault(w, v) != v:
                return False
            counts[w] = counts.get(w, 0) + 1
        return all(c == comb(self.arity, w) for w, c in counts.items())


def as_partial(f: "TruthTable | PartialFunction") -> PartialFunction:
    return f.to_partial() if isinstance(f, TruthTable) else f


def restrict_weight(f: "TruthTable | PartialFunction", w: WeightWindow) -> PartialFunction:
    if w.hi > f.arity:
        raise ValueError(f"window [{w.lo}, {w.hi}] exceeds arity {f.arity}")
    if isinstance(f, TruthTable):
        pts = points_of_weight(f.arity, w.lo, w.hi)
        return PartialFunction(f.arity, tuple(pts), tuple(f(x) for x in pts))
    pairs = [(x, v) for x, v in f.items() if w.lo <= popcount(x) <= w.hi]
    return PartialFunction.from_pairs(f.arity, pairs)


@dataclass(frozen=True)
class Term:
    pos: frozenset[int]
    neg: frozenset[int] = frozenset()

    @property
    def width(self) -> int:
        return len(self.pos) + len(self.neg)

    def mask(self) -> tuple[int, int]:
        return sum(1 << i for i in self.pos), sum(1 << i for i in self.neg)

    def satisfied(self, x: int) -> bool:
        p, q = self.mask()
        return (x & p) == p and (x & q) == 0


@dataclass(frozen=True)
class Dnf:
    arity: int
    terms: tuple[Term, ...]

    def __post_init__(self):
        for t in self.terms:
            if t.pos & t.neg:
                raise ValueError(f"term {t} uses a variable with both signs")
            if any(i < 0 or i >= self.arity for i in t.pos | t.neg):
                raise ValueError(f"term {t} out of range for arity {self.arity}")

    @classmethod
    def monotone(cls, arity: int, terms: Iterable[Iterable[int]]) -> "Dnf":
        return cls(arity, tuple(Term(frozenset(t)) for t in terms))

    @property
    def width(self) -> int:
        return max((t.width for t in self.terms), default=0)

    @property
    def size(self) -> int:
        return len(self.terms)

    @property
    def is_monotone(self) -> bool:
        return all(not t.neg for t in self.terms)

    def evaluate(self, x: int) -> int:
        return int(any(t.satisfied(x) for t in self.terms))

    def to_text(self) -> str:
        lines = [f"# arity={self.arity} width={self.width} size={self.size}"]
        for t in self.terms:
            toks = [f"+{i}" for i in sorted(t.pos)] + [f"-{i}" for i in sorted(t.neg)]
            lines.append(" ".join(toks))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, arity: int | None = None) -> "Dnf":
        terms = []
        declared = None
        for raw in text.splitlines():
            line = raw.strip()
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("arity="):
                        declared = int(tok[6:])
                continue
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            pos, neg = set(), set()
            for tok in line.split():
                if tok[0] not in "+-":
                    raise ValueError(f"bad literal {tok!r}")
                (pos if tok[0] == "+" else neg).add(int(tok[1:]))
            terms.append(Term(frozenset(pos), frozenset(neg)))
        if arity is None:
            arity = declared
        if arity is None:
            arity = 1 + max((i for t in terms for i in t.pos | t.neg), default=-1)
        return cls(arity, tuple(terms))


def dnf_to_truth_table(d: Dnf) -> TruthTable:
    _check_arity(d.arity)
    idx = np.arange(1 << d.arity, dtype=np.int64)
    out = np.zeros(1 << d.arity, dtype=bool)
    for t in d.terms:
        p, q = t.mask()
        out |= ((idx & p) == p) & ((idx & q) == 0)
    return TruthTable.from_values(d.arity, out.astype(np.uint8))


def negate_dnf(d: Dnf) -> list[list[tuple[int, bool]]]:
    """De Morgan: the complement of a DNF as a CNF, given as clauses of (index, positive) literals."""
    return [[(i, False) for i in sorted(t.pos)] + [(i, True) for i in sorted(t.neg)] for t in d.terms]


def cnf_to_truth_table(arity: int, clauses: Sequence[Sequence[tuple[int, bool]]]) -> TruthTable:
    _check_arity(arity)
    idx = np.arange(1 << arity, dtype=np.int64)
    out = np.ones(1 << arity, dtype=bool)
    for cl in clauses:
        sat = np.zeros(1 << arity, dtype=bool)
        for i, positive in cl:
            bit = ((idx >> i) & 1).astype(bool)
            sat |= bit if positive else ~bit
        out &= sat
    return TruthTable.from_values(arity, out.astype(np.uint8))


def compose_componentwise(f: TruthTable, g: TruthTable) -> TruthTable:
    """``(f o g)(x_1..x_n) = f(g(x_1), ..., g(x_n))`` with block ``i`` in bits ``i*b .. i*b+b-1``."""
    n, b = f.arity, g.arity
    _check_arity(n * b)
    idx = np.arange(1 << (n * b), dtype=np.int64)
    gv = g.values.astype(np.int64)
    inner = np.zeros(1 << (n * b), dtype=np.int64)
    for i in range(n):
        inner |= gv[(idx >> (i * b)) & ((1 << b) - 1)] << i
    return TruthTable.from_values(n * b, f.values[inner])


def compose_vector(f: TruthTable, outputs: Sequence[TruthTable]) -> TruthTable:
    """``x -> f(H_1(x), ..., H_N(x))`` for a vector of functions on a common domain."""
    if len(outputs) != f.arity:
        raise ValueError("need one inner function per input of f")
    arity = outputs[0].arity
    _check_arity(arity)
    inner = np.zeros(1 << arity, dtype=np.int64)
    for j, h in enumerate(outputs):
        if h.arity != arity:
            raise ValueError("inner functions must share a domain")
        inner |= h.values.astype(np.int64) << j
    return TruthTable.from_values(arity, f.values[inner])


def disj(m: int, k: int) -> TruthTable:
    """Set disjointness for ``k`` parties with ``m`` bits each.

    Party ``i`` owns bits ``i*m .. i*m+m-1``; the value is 1 iff no coordinate
    is held by every party.
    """
    _check_arity(m * k)
    idx = np.arange(1 << (m * k), dtype=np.int64)
    common = np.full(1 << (m * k), (1 << m) - 1, dtype=np.int64)
    for i in range(k):
        common &= (idx >> (i * m)) & ((1 << m) - 1)
    return TruthTable.from_values(m * k, (common == 0).astype(np.uint8))


def or_fn(n: int) -> TruthTable:
    _check_arity(n)
    return TruthTable.from_values(n, (np.arange(1 << n) > 0).astype(np.uint8))


def and_fn(n: int) -> TruthTable:
    _check_arity(n)
    v = np.zeros(1 << n, dtype=np.uint8)
    v[-1] = 1
    return TruthTable.from_values(n, v)


def parity_fn(n: int) -> TruthTable:
    _check_arity(n)
    return TruthTable.from_values(n, (_weights(n) & 1).astype(np.uint8))


def threshold_fn(n: int, t: int) -> TruthTable:
    _check_arity(n)
    return TruthTable.from_values(n, (_weights(n) >= t).astype(np.uint8))


def constant_fn(n: int, c: int) -> TruthTable:
    _check_arity(n)
    return TruthTable.from_values(n, np.full(1 << n, c, dtype=np.uint8))


def dictator_fn(n: int, i: int = 0) -> TruthTable:
    _check_arity(n)
    return TruthTable.from_values(n, ((np.arange(1 << n) >> i) & 1).astype(np.uint8))


def random_dnf(arity: int, n_terms: int, width: int, rng: np.random.Generator, monotone: bool = False) -> Dnf:
    terms = []
    for _ in range(n_terms):
        vars_ = rng.choice(arity, size=min(width, arity), replace=False)
        signs = np.ones(len(vars_), dtype=bool) if monotone else rng.integers(0, 2, len(vars_)).astype(bool)
        terms.append(
            Term(frozenset(int(v) for v, s in zip(vars_, signs) if s), frozenset(int(v) for v, s in zip(vars_, signs) if not s))
        )
    return Dnf(arity, tuple(terms))


def read_truth_table(path: str | Path) -> TruthTable:
    return TruthTable.from_text(Path(path).read_text())


def write_truth_table(f: TruthTable, path: str | Path) -> None:
    Path(path).write_text(f.to_text())


def read_dnf(path: str | Path, arity: int | None = None) -> Dnf:
    return Dnf.from_text(Path(path).read_text(), arity)


def write_dnf(d: Dnf, path: str | Path) -> None:
    Path(path).write_text(d.to_text())


def point_to_str(x: int, n: int) -> str:
    """Binary string with character ``i`` holding bit ``i`` (index order)."""
    return "".join("1" if (x >> i) & 1 else "0" for i in range(n))


def str_to_point(s: str) -> int:
    return sum(1 << i for i, c in enumerate(s) if c == "1")
