"""Reusable dual objects: the OR dual, correctors and high-weight truncation.

* ``or_dual`` finds a univariate omega on {0..n} with alternating signs,
  vanishing moments below a target degree and as much mass at 0 as possible.
* ``corrector`` is a symmetric measure with value 1 at 1^n, supported
  otherwise on weights <= D, orthogonal to every polynomial of degree <= D.
* ``truncate`` removes all mass above weight T by subtracting correctors,
  without disturbing moments of degree <= D.

Every construction re-verifies its advertised properties in exact arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable

from .hypercube import popcount
from .lp import solve
from .poly import INF, RationalMeasure, bits_of, orth


class GadgetError(ValueError):
    pass


def _q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- OR dual


def univariate_orth(values) -> float:
    """Least j with sum_t w(t) C(t, j) != 0 (INF for the zero function)."""
    vals = [Fraction(v) for v in values]
    if not any(vals):
        return INF
    for j in range(len(vals)):
        if sum((v * math.comb(t, j) for t, v in enumerate(vals) if v), Fraction(0)):
            return j
    raise AssertionError("nonzero function on {0..n} orthogonal to all degrees <= n")


@dataclass(frozen=True)
class OrDual:
    """omega on {0..n} with ||omega||_1 = 1 and alternating signs."""

    n: int
    target: int
    values: tuple[Fraction, ...]

    @property
    def orth(self):
        return univariate_orth(self.values)

    @property
    def at_zero(self) -> Fraction:
        return self.values[0]

    @property
    def eps_floor(self) -> Fraction:
        """Least eps with omega(0) >= (1 - eps)/2 * ||omega||_1."""
        return 1 - 2 * self.values[0]

    def point_value(self, t: int) -> Fraction:
        """Per-point value omega(t)/C(n,t) of the symmetric lift to {0,1}^n."""
        return self.values[t] / math.comb(self.n, t)

    def lift(self) -> RationalMeasure:
        """The symmetric measure x -> omega(|x|)/C(n,|x|) on {0,1}^n."""
        out = {}
        for t in range(self.n + 1):
            if self.values[t]:
                v = self.point_value(t)
                for c in combinations(range(self.n), t):
                    out[sum(1 << i for i in c)] = v
        return RationalMeasure(self.n, out)

    def decay_constant(self) -> float:
        """Largest c in (0,1] with |omega(t)| <= 1/(c t^2 2^(c t/sqrt n)) for all t >= 1."""
        return measured_decay(
            [(t, float(abs(v))) for t, v in enumerate(self.values) if t >= 1 and v],
            lambda c, t: 1.0 / (c * t * t * 2.0 ** (c * t / math.sqrt(self.n))),
        )

    def check(self) -> dict:
        vals = self.values
        l1 = sum(abs(v) for v in vals)
        return {
            "l1_is_one": l1 == 1,
            "sign_alternation": all((-1) ** t * v >= 0 for t, v in enumerate(vals)),
            "orth_at_least_target": self.orth >= self.target,
            "positive_at_zero": vals[0] > 0,
        }

    def metadata(self) -> dict:
        return {
            "n": self.n,
            "target_orth": self.target,
            "orth": self.orth if self.orth != INF else "inf",
            "omega_at_zero": _q(self.at_zero),
            "eps_floor": _q(self.eps_floor),
            "decay_constant": self.decay_constant(),
            "checks": self.check(),
        }


def measured_decay(points, envelope: Callable[[float, float], float], hi: float = 1.0, lo: float = 1e-12) -> float:
    """Largest c in [lo, hi] with value <= envelope(c, t) at every (t, value), by bisection.

    ``envelope`` must be decreasing in c.  Returns 0.0 when even ``lo`` fails.
    """
    points = list(points)

    def ok(c):
        return all(v <= envelope(c, t) for t, v in points)

    if ok(hi):
        return hi
    if not ok(lo):
        return 0.0
    a, b = math.log(lo), math.log(hi)
    for _ in range(200):
        mid = (a + b) / 2
        if ok(math.exp(mid)):
            a = mid
        else:
            b = mid
    return math.exp(a)


def or_dual(n: int, target_orth: int) -> OrDual:
    """The alternating-sign omega on {0..n} with orth >= target maximizing omega(0)/||omega||_1."""
    if not 1 <= target_orth <= n:
        raise GadgetError(f"target orth must lie in 1..{n}, got {target_orth}")
    # u_t = (-1)^t omega(t) >= 0
    A, b = [], []
    for j in range(target_orth):
        A.append([(-1) ** t * math.comb(t, j) for t in range(n + 1)])
        b.append(0)
    A.append([1] * (n + 1))
    b.append(1)
    c = [1] + [0] * n
    res = solve(A, b, c)
    if res.status != "optimal":
        raise GadgetError(f"OR dual program is {res.status}")
    values = tuple((-1) ** t * res.x[t] for t in range(n + 1))
    out = OrDual(n, target_orth, values)
    bad = [k for k, ok in out.check().items() if not ok]
    if bad:
        raise GadgetError(f"OR dual failed checks: {bad}")
    return out


# ---------------------------------------------------------------- correctors


def corrector_levels(n: int, D: int) -> list[Fraction]:
    """Per-point values a_0..a_D of the symmetric corrector on n bits.

    Orthogonality to every monomial of degree j <= D reads
    sum_{t=j}^{D} C(n-j, t-j) a_t = -1, a unit upper-triangular system.
    """
    if not 0 <= D < n:
        raise GadgetError(f"need 0 <= D < n, got n={n}, D={D}")
    a = [Fraction(0)] * (D + 1)
    for j in range(D, -1, -1):
        a[j] = -1 - sum((math.comb(n - j, t - j) * a[t] for t in range(j + 1, D + 1)), Fraction(0))
    return a


@dataclass(frozen=True)
class Corrector:
    B: int
    D: int
    anchor: int
    measure: RationalMeasure
    l1_bound: Fraction

    def check(self) -> dict:
        m, y = self.measure, self.anchor
        return {
            "support": all((x == y) or ((x & ~y) == 0 and popcount(x) <= self.D) for x in m.support()),
            "unit_at_anchor": m[y] == 1,
            "l1_bound": m.l1() <= self.l1_bound,
            "orth_above_D": orth(m, upto=self.D) > self.D,
        }

    def metadata(self) -> dict:
        return {"B": self.B, "D": self.D, "anchor": self.anchor, "l1": _q(self.measure.l1()), "l1_bound": _q(self.l1_bound), "checks": self.check()}


def _corrector_values(y: int, D: int) -> dict[int, Fraction]:
    bits = bits_of(y)
    a = corrector_levels(len(bits), D)
    out = {y: Fraction(1)}
    for t in range(D + 1):
        for c in combinations(bits, t):
            out[sum(1 << i for i in c)] = a[t]
    return out


def corrector_at(y: int, D: int, B: int, verify: bool = True) -> Corrector:
    """Corrector anchored at y in {0,1}^B: value 1 at y, else supported on x <= y with |x| <= D."""
    if popcount(y) <= D:
        raise GadgetError(f"anchor weight {popcount(y)} must exceed D={D}")
    if y >> B:
        raise GadgetError("anchor outside {0,1}^B")
    out = Corrector(B, D, y, RationalMeasure(B, _corrector_values(y, D)), 1 + 2**D * Fraction(math.comb(B, D)))
    if verify:
        _require(out.check(), "corrector")
    return out


def corrector(n: int, D: int) -> Corrector:
    """Symmetric corrector on n bits anchored at 1^n."""
    if not 0 <= D < n:
        raise GadgetError(f"need 0 <= D < n, got n={n}, D={D}")
    return corrector_at((1 << n) - 1, D, n)


def _require(checks: dict, what: str) -> None:
    bad = [k for k, ok in checks.items() if not ok]
    if bad:
        raise GadgetError(f"{what} failed checks: {bad}")


# ---------------------------------------------------------------- truncation


@dataclass(frozen=True)
class Truncation:
    original: RationalMeasure
    truncated: RationalMeasure
    T: int
    D: int
    heavy_mass: Fraction
    factor: Fraction

    @property
    def removed(self) -> RationalMeasure:
        return self.original - self.truncated

    def check(self) -> dict:
        rem = self.removed
        return {
            "support_light": all(popcount(x) <= self.T for x in self.truncated.support()),
            "orth_removed_above_D": orth(rem, upto=self.D) > self.D,
            "l1_removed_bound": rem.l1() <= self.factor * self.heavy_mass,
        }


def _apply_correctors(phi: RationalMeasure, T: int, make: Callable[[int], RationalMeasure]) -> tuple[RationalMeasure, Fraction]:
    acc = dict(phi.values)
    heavy = Fraction(0)
    for y, v in phi.items():
        if popcount(y) <= T:
            continue
        heavy += abs(v)
        for x, z in make(y).items():
            acc[x] = acc.get(x, Fraction(0)) - v * z
    return RationalMeasure(phi.arity, acc, phi.block), heavy


def truncate(phi: RationalMeasure, T: int, D: int, verify: bool = True) -> Truncation:
    """phi minus sum_{|y|>T} phi(y) zeta_y, which lives on weights <= T and agrees with phi below degree D+1."""
    if not T >= D >= 0:
        raise GadgetError(f"need T >= D >= 0, got T={T}, D={D}")
    B = phi.arity
    if T >= B:
        out, heavy = phi, Fraction(0)
    else:
        out, heavy = _apply_correctors(phi, T, lambda y: _corrector_values(y, D))
    res = Truncation(phi, out, T, D, heavy, 1 + 2**D * Fraction(math.comb(B, D)))
    if verify:
        _require(res.check(), "truncation")
    return res


# ---------------------------------------------------------------- one-sided correctors


def _block(x: int, i: int, n: int) -> int:
    return (x >> (i * n)) & ((1 << n) - 1)


@dataclass(frozen=True)
class BlockCorrector:
    n: int
    theta: int
    D: int
    T: int
    k: int
    anchor: int
    pivot_block: int
    measure: RationalMeasure

    @property
    def l1_bound(self) -> Fraction:
        return 1 + 2**self.D * Fraction(math.comb(self.n * (self.theta - 1), self.D))

    def check(self) -> dict:
        m, y = self.measure, self.anchor
        light = all(
            not all(popcount(_block(x, i, self.n)) <= self.k for i in range(self.theta)) for x in m.support()
        )
        return {
            "support": all(x == y or popcount(x) <= self.T for x in m.support()),
            "unit_at_anchor": m[y] == 1,
            "orth_above_D": orth(m, upto=self.D) > self.D,
            "l1_bound": m.l1() <= self.l1_bound,
            "zero_on_light_blocks": light,
        }


def _drop_block(x: int, i: int, n: int) -> int:
    low = x & ((1 << (i * n)) - 1)
    high = x >> ((i + 1) * n)
    return low | (high << (i * n))


def _insert_block(x: int, i: int, n: int, blk: int) -> int:
    low = x & ((1 << (i * n)) - 1)
    high = x >> (i * n)
    return low | (blk << (i * n)) | (high << ((i + 1) * n))


def onesided_corrector(y: int, n: int, theta: int, D: int, T: int, k: int, verify: bool = True) -> BlockCorrector:
    """zeta_y(x) = [x_i = y_i] * zeta(x without block i), for the lowest block i with |y_i| > k.

    Vanishes whenever every block has weight <= k.
    """
    if theta < 2:
        raise GadgetError("one-sided corrector needs theta >= 2")
    if T < n + D or T < theta * k:
        raise GadgetError(f"need T >= n + D and T >= theta*k, got T={T}")
    if popcount(y) <= T:
        raise GadgetError("anchor must have weight above T")
    i = next(j for j in range(theta) if popcount(_block(y, j, n)) > k)
    rest = _drop_block(y, i, n)
    yi = _block(y, i, n)
    base = _corrector_values(rest, D)
    vals = {_insert_block(x, i, n, yi): v for x, v in base.items()}
    out = BlockCorrector(n, theta, D, T, k, y, i, RationalMeasure(n * theta, vals, n))
    if verify:
        _require(out.check(), "one-sided corrector")
    return out


@dataclass(frozen=True)
class BlockTruncation(Truncation):
    n: int = 0
    theta: int = 0
    k: int = 0

    def check(self) -> dict:
        out = super().check()
        n, k = self.n, self.k
        same = True
        for x in set(self.original.support()) | set(self.truncated.support()):
            if all(popcount(_block(x, i, n)) <= k for i in range(self.theta)):
                if self.original[x] != self.truncated[x]:
                    same = False
                    break
        out["unchanged_on_light_blocks"] = same
        return out


def truncate_onesided(phi: RationalMeasure, n: int, theta: int, k: int, T: int, D: int, verify: bool = True) -> BlockTruncation:
    """Truncation by one-sided correctors; leaves phi untouched on inputs whose blocks all have weight <= k."""
    if phi.arity != n * theta:
        raise GadgetError("measure arity must equal n * theta")
    out, heavy = _apply_correctors(
        phi, T, lambda y: onesided_corrector(y, n, theta, D, T, k, verify=False).measure.values
    )
    factor = 1 + 2**D * Fraction(math.comb(n * (theta - 1), D))
    res = BlockTruncation(phi, out, T, D, heavy, factor, n, theta, k)
    if verify:
        _require(res.check(), "one-sided truncation")
    return res


def write_gadget(measure: RationalMeasure, metadata: dict, path) -> None:
    """Write the measure file plus a ``.json`` sidecar holding its declared and measured properties."""
    import json
    from pathlib import Path

    from .poly import write_measure

    path = Path(path)
    write_measure(measure, path)
    Path(str(path) + ".json").write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
