"""Primes, modular inverses, residue multisets and their discrepancy.

The M-discrepancy of a nonempty multiset Z is

    disc_M(Z) = max_{k=1..M-1} | (1/|Z|) sum_{z in Z} xi^(k z) |,   xi = exp(2 pi i / M).

It is evaluated in double precision.  Angles are reduced exactly in integer
arithmetic (k*z mod M) before the trigonometric call, so every term carries a
few ulps of error and the reported enclosure is a rigorous bound on the
accumulated rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

_EPS = 2.0**-52


class ParameterError(ValueError):
    pass


def primes_upto(n: int) -> list[int]:
    """All primes <= n by the sieve of Eratosthenes."""
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(sieve)]


def primes_in(lo, hi) -> list[int]:
    """Primes p with lo < p <= hi (bounds may be rational)."""
    return [p for p in primes_upto(math.floor(hi)) if p > lo]


def mod_inverse(a: int, b: int) -> int:
    """The inverse of a modulo b, as an integer in {1, ..., b-1}."""
    if b < 2:
        raise ParameterError(f"modulus must be >= 2, got {b}")
    if math.gcd(a, b) != 1:
        raise ParameterError(f"{a} is not invertible modulo {b}")
    return pow(a, -1, b)


@dataclass(frozen=True)
class ResidueMultiset:
    """A multiset of residues modulo ``modulus``, kept as sorted (value, multiplicity) pairs."""

    modulus: int
    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.modulus < 2:
            raise ParameterError(f"modulus must be >= 2, got {self.modulus}")

    @classmethod
    def of(cls, modulus: int, elements: Iterable[int]) -> "ResidueMultiset":
        counts: dict[int, int] = {}
        for z in elements:
            z = int(z) % modulus
            counts[z] = counts.get(z, 0) + 1
        return cls(modulus, tuple(sorted(counts.items())))

    @classmethod
    def from_counts(cls, modulus: int, counts: Mapping[int, int]) -> "ResidueMultiset":
        merged: dict[int, int] = {}
        for z, c in counts.items():
            if c < 0:
                raise ParameterError("negative multiplicity")
            if c:
                z = int(z) % modulus
                merged[z] = merged.get(z, 0) + int(c)
        return cls(modulus, tuple(sorted(merged.items())))

    def __len__(self) -> int:
        return sum(c for _, c in self.pairs)

    @property
    def support(self) -> list[int]:
        return [z for z, _ in self.pairs]

    def elements(self) -> list[int]:
        return [z for z, c in self.pairs for _ in range(c)]

    def is_set(self) -> bool:
        return all(c == 1 for _, c in self.pairs)

    def translate(self, c: int) -> "ResidueMultiset":
        return ResidueMultiset.from_counts(self.modulus, {z + c: m for z, m in self.pairs})

    def scale(self, u: int) -> "ResidueMultiset":
        return ResidueMultiset.from_counts(self.modulus, {z * u: m for z, m in self.pairs})

    def replicate(self, times: int) -> "ResidueMultiset":
        if times < 0:
            raise ParameterError("negative replication count")
        return ResidueMultiset.from_counts(self.modulus, {z: m * times for z, m in self.pairs})

    def to_text(self) -> str:
        return "".join(f"{z}\n" for z in self.elements())

    @classmethod
    def from_text(cls, modulus: int, text: str) -> "ResidueMultiset":
        vals = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                vals.append(int(line))
        return cls.of(modulus, vals)


def read_residues(path, modulus: int) -> ResidueMultiset:
    with open(path) as fh:
        return ResidueMultiset.from_text(modulus, fh.read())


def write_residues(path, s: ResidueMultiset) -> None:
    with open(path, "w") as fh:
        fh.write(s.to_text())


@dataclass(frozen=True)
class Discrepancy:
    value: float
    lower: Fraction
    upper: Fraction
    error: float
    argmax: int
    method: str

    def __float__(self) -> float:
        return self.value


def exponential_sums(s: ResidueMultiset, ks=None, chunk: int = 1 << 22) -> np.ndarray:
    """|sum_z xi^(k z)| / |Z| for each k (default k = 1..M-1)."""
    M = s.modulus
    n = len(s)
    if n == 0:
        raise ParameterError("discrepancy of an empty multiset")
    ks = np.arange(1, M, dtype=np.int64) if ks is None else np.asarray(ks, dtype=np.int64)
    z = np.array([v for v, _ in s.pairs], dtype=np.int64)
    w = np.array([c for _, c in s.pairs], dtype=np.float64)
    out = np.empty(len(ks))
    step = max(1, chunk // max(1, len(z)))
    two_pi_over_m = 2.0 * math.pi / M
    for lo in range(0, len(ks), step):
        kk = ks[lo : lo + step]
        ang = (np.multiply.outer(kk % M, z) % M).astype(np.float64) * two_pi_over_m
        re = np.cos(ang) @ w
        im = np.sin(ang) @ w
        out[lo : lo + step] = np.hypot(re, im) / n
    return out


def _enclose(value: float, err: float) -> tuple[Fraction, Fraction]:
    lo = max(Fraction(0), Fraction(value) - Fraction(err))
    hi = min(Fraction(1), Fraction(value) + Fraction(err))
    return lo, max(lo, hi)


def discrepancy(s: ResidueMultiset, method: str = "auto") -> Discrepancy:
    """disc_M(s) with a rigorous rounding enclosure.

    ``method`` is ``"direct"`` (explicit exponential sums), ``"fft"`` (one FFT
    of the multiplicity vector) or ``"auto"``.
    """
    M = s.modulus
    n = len(s)
    if n == 0:
        raise ParameterError("discrepancy of an empty multiset")
    if method == "auto":
        method = "direct" if M * len(s.pairs) <= 4_000_000 else "fft"
    if method == "direct":
        sums = exponential_sums(s)
        terms = len(s.pairs)
        # each cos/sin term: angle rounding plus libm error, a handful of ulps;
        # dot product: at most terms*eps relative to the l1 mass
        err = 16.0 * _EPS * (terms + 4)
    elif method == "fft":
        vec = np.zeros(M)
        for z, c in s.pairs:
            vec[z] = c
        sums = np.abs(np.fft.fft(vec))[1:] / n
        # backward error of the radix FFT: O(eps log2 M) relative to the l2 norm, bounded by l1
        err = 16.0 * _EPS * (math.ceil(math.log2(M)) + 4) * math.sqrt(M)
    else:
        raise ParameterError(f"unknown method {method!r}")
    if M == 1 or len(sums) == 0:
        return Discrepancy(0.0, Fraction(0), Fraction(0), 0.0, 0, method)
    k = int(np.argmax(sums))
    value = float(min(1.0, sums[k]))
    lo, hi = _enclose(value, err)
    return Discrepancy(value, lo, hi, err, k + 1, method)


def discrepancy_reference(s: ResidueMultiset, dps: int = 40) -> float:
    """Slow arbitrary-precision evaluation, used as a test oracle."""
    import mpmath

    with mpmath.workdps(dps):
        n = len(s)
        best = mpmath.mpf(0)
        for k in range(1, s.modulus):
            acc = mpmath.mpc(0)
            for z, c in s.pairs:
                acc += c * mpmath.expjpi(mpmath.mpf(2 * ((k * z) % s.modulus)) / s.modulus)
            best = max(best, abs(acc) / n)
        return float(best)


def disc_shape(M: int, t: int) -> float:
    """log t / t^(1/4) * log M / (1 + log log M), the decay profile of the explicit set."""
    return math.log(t) / t**0.25 * math.log(M) / (1 + math.log(math.log(M)))


@dataclass(frozen=True)
class AjtaiParams:
    """Parameters of the prime-inverse construction: R shifts, primes in (P/2, P], sets S_p."""

    R: int
    P: Fraction
    sets: Mapping[int, tuple[int, ...]] = field(default_factory=dict)

    @classmethod
    def full(cls, M: int, R: int, P) -> "AjtaiParams":
        """S_p = {1, ..., p-1} for every eligible prime."""
        P = Fraction(P)
        return cls(R, P, {p: tuple(range(1, p)) for p in eligible_primes(M, P)})

    @property
    def delta(self) -> Fraction:
        """Largest ratio between cardinalities of the S_p, recomputed from the sets."""
        sizes = [len(v) for v in self.sets.values()]
        if not sizes:
            return Fraction(1)
        if min(sizes) == 0:
            return Fraction(math.inf) if max(sizes) else Fraction(1)
        return Fraction(max(sizes), min(sizes))

    def check(self, M: int) -> None:
        if self.R < 1:
            raise ParameterError(f"R must be >= 1, got {self.R}")
        if self.P < 2:
            raise ParameterError(f"P must be >= 2, got {self.P}")
        if M < self.P**2 * (self.R + 1):
            raise ParameterError(f"need M >= P^2 (R+1); got M={M}, P={self.P}, R={self.R}")
        allowed = set(eligible_primes(M, self.P))
        for p, sp in self.sets.items():
            if p not in allowed:
                raise ParameterError(f"{p} is not a prime in (P/2, P] coprime to {M}")
            if any(not 1 <= s <= p - 1 for s in sp) or len(set(sp)) != len(sp):
                raise ParameterError(f"S_{p} must be a subset of 1..{p - 1}")


def eligible_primes(M: int, P) -> list[int]:
    P = Fraction(P)
    return [p for p in primes_in(P / 2, P) if M % p]


@dataclass(frozen=True)
class AjtaiSet:
    multiset: ResidueMultiset
    primes: tuple[int, ...]
    delta: Fraction

    @property
    def empty(self) -> bool:
        return len(self.multiset) == 0


def build_ajtai_set(M: int, params: AjtaiParams) -> AjtaiSet:
    """The multiset {(r + s * (p^-1 mod M)) mod M}; distinctness and nonzeroness are checked."""
    params.check(M)
    counts: dict[int, int] = {}
    primes = tuple(sorted(p for p, sp in params.sets.items() if sp))
    for p in primes:
        inv = mod_inverse(p, M)
        for s in params.sets[p]:
            for r in range(1, params.R + 1):
                z = (r + s * inv) % M
                counts[z] = counts.get(z, 0) + 1
    out = ResidueMultiset.from_counts(M, counts)
    if 0 in counts or not out.is_set():
        raise AssertionError(f"construction produced a repeated or zero residue for M={M}")
    return AjtaiSet(out, primes, params.delta)


@dataclass(frozen=True)
class LowDiscSet:
    multiset: ResidueMultiset
    branch: str  # "full", "singleton" or "ajtai"
    P: int | None = None
    R: int | None = None
    primes: tuple[int, ...] = ()


def lowdisc_parameters(t: int) -> tuple[int, int]:
    """P = floor(t^(1/4)) and R = floor(sqrt(t) - 1), computed exactly."""
    return math.isqrt(math.isqrt(t)), math.isqrt(t) - 1


def build_lowdisc_set(M: int, t: int, c_star: float | None = None) -> LowDiscSet:
    """A nonempty set of at most t residues modulo M with small M-discrepancy.

    With ``t >= M`` this is all of Z_M.  Otherwise the prime-inverse
    construction is used with P = floor(t^(1/4)), R = floor(sqrt(t) - 1),
    S_p = {1..p-1}, whenever its hypotheses hold and it yields a nonempty set.
    When ``c_star`` is given and the target bound
    c_star * disc_shape(M, t) exceeds 1, or when the construction is not
    applicable, the singleton {1} is returned.
    """
    if M < 2 or t < 2:
        raise ParameterError(f"need M >= 2 and t >= 2, got M={M}, t={t}")
    if t >= M:
        return LowDiscSet(ResidueMultiset.of(M, range(1, M + 1)), "full")
    single = LowDiscSet(ResidueMultiset.of(M, [1]), "singleton")
    if c_star is not None and c_star * disc_shape(M, t) > 1:
        return single
    P, R = lowdisc_parameters(t)
    if P < 2 or R < 1 or M < P * P * (R + 1):
        return single
    built = build_ajtai_set(M, AjtaiParams.full(M, R, P))
    if built.empty:
        return single
    assert len(built.multiset) <= R * P * P <= t
    return LowDiscSet(built.multiset, "ajtai", P, R, built.primes)
