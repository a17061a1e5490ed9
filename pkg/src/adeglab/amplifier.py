"""Hardness amplification by composition with a coloring-based decoder.

Pipeline:

1. ``pseudodistributions``: one signed measure per color of a coloring of
   C([n'], k), each concentrated on the weight-k points of its color class
   and pairwise indistinguishable by low-degree polynomials.
2. ``normalize_family``: shift and rescale them into probability
   distributions lambda_v on {0,1}^n, indexed by V = {0^N, e_1..e_N}.
3. ``decoder``: h maps weight-k inputs in the support of lambda_v to v, and
   anything heavier to 1^N; H ORs h over theta blocks.
4. ``compose_witness``: lifts a dual witness psi for f on weight <= theta to
   a witness Psi for f o H on weight <= T.

Every construction re-checks its properties exactly and records the checks
in a report; constants left unspecified by the analysis are measured.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product

from .adeg import RealFunction, adeg, best_error, dual_witness, onedeg, restricted, witness_report
from .coloring import Coloring, balance_profile, eps_delta_frontier
from .duals import OrDual, measured_decay, or_dual, truncate, truncate_onesided
from .hypercube import Dnf, Term, TruthTable, compose_vector, dnf_to_truth_table, points_of_weight, popcount
from .poly import INF, RationalMeasure, orth, tensor_all


class ConstructionError(ValueError):
    pass


def _q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _orth_json(o):
    return "inf" if o == INF else int(o)


def _failed(checks: dict) -> list[str]:
    return [k for k, v in checks.items() if v is False]


# ---------------------------------------------------------------- pseudodistributions


def omega_support(n: int, m: int, k: int) -> int:
    """Largest t with k + t*(m-k) <= n."""
    return (n - k) // (m - k)


def default_omega(n: int, m: int, k: int, target: int | None = None) -> OrDual:
    D = omega_support(n, m, k)
    if D < 1:
        raise ConstructionError(f"need n >= m, got n={n} m={m}")
    if target is None:
        target = max(1, min(D, math.isqrt(D - 1) + 1))
    return or_dual(D, target)


@dataclass
class PseudoFamily:
    coloring: Coloring
    m: int
    k: int
    omega: OrDual
    phi: dict[int, RationalMeasure]
    checks: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.coloring.n

    def report(self) -> dict:
        return {"checks": dict(self.checks), "measured": dict(self.measured)}


def _phi_S_level_weights(n: int, m: int, k: int, omega: OrDual) -> dict[int, Fraction]:
    """Hamming weight -> value of phi_S on points above 1_S of that weight."""
    step = m - k
    out = {}
    for t, w in enumerate(omega.values):
        if w:
            lvl = k + t * step
            out[lvl] = w / (math.comb(n - k, lvl - k) * omega.values[0])
    return out


def pseudodistributions(gamma: Coloring, m: int, k: int, omega: OrDual | None = None, target: int | None = None) -> PseudoFamily:
    """phi_i = E_{S in class i} phi_S - [|x| >= m] E_{S} phi_S, re-verified exactly."""
    n, r = gamma.n, gamma.r
    if gamma.k != k:
        raise ConstructionError("coloring is for a different k")
    if not n >= m > k:
        raise ConstructionError(f"need n >= m > k, got n={n} m={m} k={k}")
    if omega is None:
        omega = default_omega(n, m, k, target)
    if omega.n != omega_support(n, m, k):
        raise ConstructionError(f"omega must live on 0..{omega_support(n, m, k)}")
    classes = {i: gamma.class_of(i) for i in range(1, r + 1)}
    if any(not v for v in classes.values()):
        raise ConstructionError("every color class must be nonempty")
    weights = _phi_S_level_weights(n, m, k, omega)
    total = math.comb(n, k)
    # containment counts per color on every relevant heavy point
    heavy = [x for lvl in sorted(weights) if lvl > k for x in points_of_weight(n, lvl, lvl)]
    sub = gamma.subsets
    cols = gamma.colors
    phi = {}
    for i in range(1, r + 1):
        cls = classes[i]
        vals = {S: Fraction(1, len(cls)) for S in cls}
        mine = [int(s) for s, c in zip(sub, cols) if c == i]
        for x in heavy:
            w = weights[popcount(x)]
            inside = sum(1 for S in mine if S & x == S)
            v = w * (Fraction(inside, len(cls)) - Fraction(math.comb(popcount(x), k), total))
            if v:
                vals[x] = v
        phi[i] = RationalMeasure(n, vals)
    fam = PseudoFamily(gamma, m, k, omega, phi)
    _check_pseudo(fam)
    return fam


def _balance_pairs(gamma: Coloring, m: int) -> list[tuple[Fraction, Fraction]]:
    prof = balance_profile(gamma, m)
    return [(e, d) for e, d in eps_delta_frontier(prof) if e < 1 and d < 1]


def _check_pseudo(fam: PseudoFamily) -> None:
    n, m, k, r = fam.n, fam.m, fam.k, fam.coloring.r
    phi = fam.phi
    c = {}
    c["support"] = all(popcount(x) == k or popcount(x) >= m for p in phi.values() for x in p.support())
    c["essential_support"] = all(
        {x for x in phi[i].support() if popcount(x) == k} == set(fam.coloring.class_of(i)) for i in phi
    )
    c["nonnegative_on_level_k"] = all(v >= 0 for p in phi.values() for x, v in p.items() if popcount(x) == k)
    c["normalization"] = all(p.mass_where(lambda x: popcount(x) == k) == 1 for p in phi.values())

    tails = {i: p.abs_mass_where(lambda x: popcount(x) != k) for i, p in phi.items()}
    worst_tail = max(tails.values())
    pairs = _balance_pairs(fam.coloring, m)
    if pairs:
        bound, (be, bd) = min(((8 * e + 4 * r * d) / (1 - e), (e, d)) for e, d in pairs)
        c["tail_bound"] = worst_tail <= bound
        l1w = sum(abs(v) for v in fam.omega.values)
        tight = min((2 * e + r * d) / (1 - e) for e, d in pairs) * l1w / fam.omega.values[0]
        c["tail_bound_tight"] = worst_tail <= tight
    else:
        bound, be, bd, tight = None, None, None, None
        c["tail_bound"] = True  # no (eps, delta) pair with eps, delta < 1: hypothesis fails, bound vacuous
    fam.measured.update(
        tail_max=_q(worst_tail),
        tail_bound=None if bound is None else _q(bound),
        tail_bound_pair=None if be is None else [_q(be), _q(bd)],
        tail_bound_tight=None if tight is None else _q(tight),
        omega_at_zero_above_quarter=fam.omega.values[0] > Fraction(1, 4),
    )

    # graded bound: fit c' over the balance frontier
    per_level: dict[int, Fraction] = {}
    for p in phi.values():
        acc: dict[int, Fraction] = {}
        for x, v in p.items():
            if popcount(x) > k:
                acc[popcount(x)] = acc.get(popcount(x), Fraction(0)) + abs(v)
        for lvl, v in acc.items():
            per_level[lvl] = max(per_level.get(lvl, Fraction(0)), v)
    best_c = 0.0
    for e, d in pairs:
        coef = float((e + r * d) / (1 - e))
        cc = measured_decay(
            [(l, float(v)) for l, v in per_level.items()],
            lambda cst, l, coef=coef: coef * m * m / (cst * l * l) * math.exp(-cst * (l - k) / math.sqrt(n * m)),
        )
        best_c = max(best_c, cc)
    fam.measured["graded_constant"] = best_c if per_level else 1.0

    o = min((orth(phi[i] - phi[j]) for i in phi for j in phi if i < j), default=INF)
    fam.measured["orth_min"] = _orth_json(o)
    fam.measured["orth_floor_constant"] = None if o == INF else o / math.sqrt(n / m)
    fam.measured["omega_orth"] = _orth_json(fam.omega.orth)
    c["orth_at_least_omega_orth"] = o >= fam.omega.orth
    fam.checks.update(c)
    bad = [k for k, v in c.items() if v is False]
    if bad:
        raise ConstructionError(f"pseudodistribution checks failed: {bad}")


# ---------------------------------------------------------------- normalized family


@dataclass
class DistributionFamily:
    """Probability distributions on {0,1}^n indexed by colors 1..r."""

    n: int
    n_active: int
    m: int
    k: int
    lam: dict[int, RationalMeasure]
    beta: Fraction
    coloring: Coloring
    checks: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)

    @property
    def r(self) -> int:
        return len(self.lam)

    def report(self) -> dict:
        return {"checks": dict(self.checks), "measured": dict(self.measured)}


def normalize_family(fam: PseudoFamily, n: int | None = None, beta=None) -> DistributionFamily:
    """lambda_i = (phi_i - [|x|>k] min_j phi_j) / norm, on n >= n' bits with the extra bits fixed to 0."""
    n_act = fam.n
    n = n_act if n is None else n
    if n < n_act:
        raise ConstructionError("ambient dimension below the active dimension")
    k, m = fam.k, fam.m
    phi = fam.phi
    pts = set()
    for p in phi.values():
        pts.update(p.support())
    low = {x: min(p[x] for p in phi.values()) for x in pts if popcount(x) > k}
    tilde = {i: RationalMeasure(n_act, {x: p[x] - low.get(x, 0) for x in pts}) for i, p in phi.items()}
    norms = {i: t.l1() for i, t in tilde.items()}
    c = {}
    c["nonnegative"] = all(v >= 0 for t in tilde.values() for _, v in t.items())
    c["equal_l1"] = len(set(norms.values())) == 1
    if not c["nonnegative"] or any(v == 0 for v in norms.values()):
        raise ConstructionError("shifted family is not a nonnegative nonzero family")
    lam = {i: RationalMeasure(n, {x: v / norms[i] for x, v in t.items()}) for i, t in tilde.items()}
    c["probability"] = all(l.total() == 1 for l in lam.values())
    c["support"] = all(popcount(x) == k or popcount(x) >= m for l in lam.values() for x in l.support())
    c["trailing_bits_zero"] = all(x >> n_act == 0 for l in lam.values() for x in l.support())
    c["essential_support"] = all(
        {x for x in lam[i].support() if popcount(x) == k} == set(fam.coloring.class_of(i)) for i in lam
    )
    level_k = {i: l.mass_where(lambda x: popcount(x) == k) for i, l in lam.items()}
    beta_measured = 1 - min(level_k.values())
    if beta is not None:
        beta = Fraction(beta)
        c["level_k_mass"] = beta_measured <= beta
    else:
        beta = beta_measured
    seen = {}
    disjoint = True
    for i, l in lam.items():
        for x in l.support():
            if popcount(x) == k:
                if seen.setdefault(x, i) != i:
                    disjoint = False
    c["level_k_disjoint"] = disjoint

    # graded bound with a measured constant
    worst: dict[int, Fraction] = {}
    for l in lam.values():
        acc: dict[int, Fraction] = {}
        for x, v in l.items():
            acc[popcount(x)] = acc.get(popcount(x), Fraction(0)) + v
        for lvl, v in acc.items():
            worst[lvl] = max(worst.get(lvl, Fraction(0)), v)
    cg = measured_decay(
        [(lvl, float(v)) for lvl, v in worst.items() if lvl >= k],
        lambda cst, lvl: math.exp(-cst * (lvl - k) / math.sqrt(n_act * m)) / (cst * (lvl - k + 1) ** 2),
    )
    c["graded_constant_positive"] = cg > 0

    o = min((orth(lam[i] - lam[j]) for i in lam for j in lam if i < j), default=INF)
    phi_o = fam.measured.get("orth_min")
    c["orth_matches_pseudo"] = _orth_json(o) == phi_o
    out = DistributionFamily(n, n_act, m, k, lam, beta, fam.coloring, c)
    out.measured.update(
        beta_measured=_q(beta_measured),
        level_k_mass={str(i): _q(v) for i, v in level_k.items()},
        l1_before_normalizing=_q(next(iter(norms.values()))),
        graded_constant=cg,
        orth_min=_orth_json(o),
        orth_floor_constant=None if o == INF else o / math.sqrt(n_act / m),
    )
    bad = _failed(c)
    if bad:
        raise ConstructionError(f"normalized family checks failed: {bad}")
    return out


# ---------------------------------------------------------------- decoder


def color_vector(color: int, N: int) -> int:
    """Colors 1..N go to e_1..e_N and color N+1 to 0^N."""
    if not 1 <= color <= N + 1:
        raise ValueError(f"color {color} outside 1..{N + 1}")
    return 0 if color == N + 1 else 1 << (color - 1)


def vector_color(v: int, N: int) -> int:
    if v == 0:
        return N + 1
    if popcount(v) != 1 or v >> N:
        raise ValueError("not an element of V")
    return v.bit_length()


@dataclass(frozen=True)
class Decoder:
    n: int
    k: int
    N: int
    theta: int
    h: tuple[Dnf, ...]
    H: tuple[Dnf, ...]

    def h_value(self, z: int) -> int:
        return sum(d.evaluate(z) << j for j, d in enumerate(self.h))

    def H_tables(self) -> list[TruthTable]:
        return [dnf_to_truth_table(d) for d in self.H]


def decoder(gamma: Coloring, k: int, N: int, theta: int = 1, n: int | None = None) -> Decoder:
    """h_j = OR over (k+1)-sets and class-j k-sets of AND; H = blockwise OR of h."""
    if gamma.r != N + 1:
        raise ConstructionError(f"coloring needs N+1 = {N + 1} colors, has {gamma.r}")
    n = gamma.n if n is None else n
    upper = [tuple(c) for c in combinations(range(n), k + 1)]
    h = []
    for j in range(1, N + 1):
        cls = [tuple(i for i in range(gamma.n) if S >> i & 1) for S in gamma.class_of(j)]
        h.append(Dnf.monotone(n, upper + cls))
    H = []
    for d in h:
        terms = [tuple(b * n + s for s in t.pos) for b in range(theta) for t in d.terms]
        H.append(Dnf.monotone(n * theta, terms))
    return Decoder(n, k, N, theta, tuple(h), tuple(H))


def check_decoder(dec: Decoder, fam: DistributionFamily) -> dict:
    N, k, n = dec.N, dec.k, dec.n
    c = {"width": all(d.width <= k + 1 for d in dec.H) and all(d.is_monotone for d in dec.H)}
    ok = True
    for i, l in fam.lam.items():
        v = color_vector(i, N)
        for x in l.support():
            if popcount(x) == k and dec.h_value(x) != v:
                ok = False
    c["h_on_short_inputs"] = ok
    full = (1 << N) - 1
    c["h_heavy_is_all_ones"] = all(dec.h_value(z) == full for z in points_of_weight(n, k + 1, n))
    return c


# ---------------------------------------------------------------- composition


def tuples_summing_to(u: int, N: int, theta: int) -> list[tuple[int, ...]]:
    """All v in V^theta with v_1 + ... + v_theta = u (as integer vectors)."""
    bits = [1 << j for j in range(N) if u >> j & 1]
    if len(bits) > theta:
        return []
    out = []
    for slots in permutations(range(theta), len(bits)):
        v = [0] * theta
        for b, s in zip(bits, slots):
            v[s] = b
        out.append(tuple(v))
    return out


def lambda_tensor(fam: DistributionFamily, v: tuple[int, ...], N: int) -> RationalMeasure:
    return tensor_all([fam.lam[vector_color(x, N)] for x in v])


@dataclass
class Composition:
    Psi: RationalMeasure
    tilde: dict[tuple[int, ...], RationalMeasure]
    delta_measured: Fraction
    tails: dict[tuple[int, ...], Fraction]
    checks: dict = field(default_factory=dict)


def compose_witness(psi: RationalMeasure, fam: DistributionFamily, N: int, theta: int, T: int, D: int, side: str = "two") -> Composition:
    """Psi = sum_u psi(u) E_{v: sum v = u} tilde(Lambda_v)."""
    if side not in ("two", "one"):
        raise ValueError("side must be 'two' or 'one'")
    if psi.arity != N or any(popcount(u) > theta for u in psi.support()):
        raise ConstructionError("psi must live on {0,1}^N restricted to weight <= theta")
    n, k = fam.n, fam.k
    needed = {v for u in psi.support() for v in tuples_summing_to(u, N, theta)}
    tilde, tails = {}, {}
    delta = Fraction(0)
    checks = {"tilde_support": True, "tilde_orth": True, "tilde_l1": True}
    if side == "one":
        checks["tilde_equals_on_light_blocks"] = True
    for v in sorted(needed):
        L = lambda_tensor(fam, v, N).with_block(n)
        tails[v] = L.mass_where(lambda x: popcount(x) > T)
        if side == "two":
            tr = truncate(L, T, D, verify=False)
        else:
            tr = truncate_onesided(L, n, theta, k, T, D, verify=False)
        res = tr.check()
        checks["tilde_support"] &= res["support_light"]
        checks["tilde_orth"] &= res["orth_removed_above_D"]
        checks["tilde_l1"] &= res["l1_removed_bound"]
        if side == "one":
            checks["tilde_equals_on_light_blocks"] &= res["unchanged_on_light_blocks"]
        tilde[v] = tr.truncated
        delta = max(delta, tr.removed.l1())
    acc: dict[int, Fraction] = {}
    for u, w in psi.items():
        vs = tuples_summing_to(u, N, theta)
        share = w / len(vs)
        for v in vs:
            for x, val in tilde[v].items():
                acc[x] = acc.get(x, Fraction(0)) + share * val
    Psi = RationalMeasure(n * theta, acc, n)
    return Composition(Psi, tilde, delta, tails, checks)


# ---------------------------------------------------------------- end to end


@dataclass(frozen=True)
class AmplifierParams:
    n: int
    m: int
    k: int
    N: int
    theta: int
    D: int
    T: int
    beta: Fraction | None = None
    eps: Fraction = Fraction(1, 3)
    omega_target: int | None = None

    @property
    def r(self) -> int:
        return self.N + 1

    def structural(self, side: str) -> dict:
        c = {"n_m_k": self.n >= self.m > self.k >= 1, "theta": self.theta >= 1, "T_at_least_D": self.T >= self.D}
        if side == "one":
            c["T_at_least_D_plus_n"] = self.T >= self.D + self.n
            c["T_at_least_theta_k"] = self.T >= self.theta * self.k
            c["theta_at_least_2"] = self.theta >= 2 or self.T >= self.n * self.theta
        return c

    def hypotheses(self, c: float | None = None, c_star: float = 1.0, beta=None) -> dict:
        """Status of the analytic hypotheses (enforced unless waived in toy mode)."""
        n, m, k, N, th = self.n, self.m, self.k, self.N, self.theta
        r = N + 1
        out = {"n_half_m_k": n / 2 >= m > k}
        beta = self.beta if beta is None else beta
        if beta is not None:
            lhs = 4 * r * r * k * math.exp(-math.sqrt(m) / (16 * k)) + r * (3 * c_star * math.log(n + r) ** 2 / m**0.25) ** k
            out["balance"] = lhs <= float(beta) / (16 * r * r * m * m)
        if c:
            out["T_theta_k"] = self.T >= 8 * math.e / c * th * (1 + math.log(th)) + th * k
        out["T_at_least_D"] = self.T >= self.D
        out["T_at_least_D_plus_n"] = self.T >= self.D + n
        return out

    def delta_formula(self, c: float) -> float:
        n, m = self.n, self.m
        pre = 1 + 2**self.D * math.comb(n * self.theta, self.D)
        return pre * math.exp(-c * (self.T - self.theta * self.k) / (2 * math.sqrt(n * m)))

    def to_json(self) -> dict:
        out = {k: getattr(self, k) for k in ("n", "m", "k", "N", "theta", "D", "T")}
        out["beta"] = None if self.beta is None else _q(self.beta)
        out["eps"] = _q(self.eps)
        out["omega_target"] = self.omega_target
        return out

    @classmethod
    def from_json(cls, d: dict) -> "AmplifierParams":
        beta = d.get("beta")
        return cls(
            d["n"], d["m"], d["k"], d["N"], d["theta"], d["D"], d["T"],
            None if beta is None else Fraction(beta), Fraction(d.get("eps", "1/3")), d.get("omega_target"),
        )


@dataclass
class Certificate:
    params: AmplifierParams
    side: str
    checks: dict
    measured: dict
    certified_bound: object
    short_circuit: bool
    decoder: Decoder
    Psi: RationalMeasure | None
    composed: TruthTable

    @property
    def passed(self) -> bool:
        return not _failed(self.checks)

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "side": self.side,
            "checks": {k: v for k, v in self.checks.items()},
            "measured": self.measured,
            "certified_bound": self.certified_bound,
            "short_circuit": self.short_circuit,
            "passed": self.passed,
        }


def composed_table(f: TruthTable, dec: Decoder) -> TruthTable:
    return compose_vector(f, dec.H_tables())


def amplify(
    f: TruthTable,
    params: AmplifierParams,
    gamma: Coloring,
    side: str = "two",
    cross_check: bool = False,
    waive_hypotheses: bool = False,
) -> Certificate:
    """Build H, lift a witness for f on weight <= theta to one for f o H on weight <= T, and check everything.

    The analytic hypotheses (n/2 >= m, the balance inequality, the T lower
    bound) fail at every desk-sized instance; ``waive_hypotheses`` records
    them instead of refusing to run.  Structural conditions are always enforced.
    """
    p = params
    if f.arity != p.N:
        raise ConstructionError(f"f has arity {f.arity}, expected N={p.N}")
    if side == "one" and f((1 << p.N) - 1) != 0:
        raise ConstructionError("one-sided amplification needs f(1^N) = 0")
    bad = [k for k, ok in p.structural(side).items() if not ok]
    if bad:
        raise ConstructionError(f"structural conditions fail: {bad}")
    if gamma.r != p.r or gamma.k != p.k or gamma.n > p.n:
        raise ConstructionError("coloring does not match the parameters")

    checks: dict = {}
    measured: dict = {}
    pseudo = pseudodistributions(gamma, p.m, p.k, target=p.omega_target)
    fam = normalize_family(pseudo, p.n, p.beta)
    for key, v in pseudo.checks.items():
        checks[f"pseudo.{key}"] = v
    for key, v in fam.checks.items():
        checks[f"family.{key}"] = v
    measured["pseudo"] = pseudo.measured
    measured["family"] = fam.measured
    measured["omega"] = pseudo.omega.metadata()
    beta = fam.beta
    c_graded = fam.measured["graded_constant"]

    dec = decoder(gamma, p.k, p.N, p.theta, p.n)
    for key, v in check_decoder(dec, fam).items():
        checks[f"decoder.{key}"] = v
    F = composed_table(f, dec)

    # witness for f on weight <= theta
    g = restricted(f, min(p.theta, p.N))
    deg = (onedeg if side == "one" else adeg)(g, p.eps)
    d = deg.degree
    measured["d"] = _orth_json(d)
    hyp = p.hypotheses(c_graded, beta=beta)
    measured["hypotheses"] = hyp
    measured["hypotheses_waived"] = waive_hypotheses
    analytic = [k for k in ("n_half_m_k", "balance", "T_theta_k") if hyp.get(k) is False]
    if analytic and not waive_hypotheses:
        raise ConstructionError(f"analytic hypotheses fail: {analytic} (toy mode waives them)")
    if d == 0 or d == INF:
        cert = Certificate(p, side, checks, measured, 0, False, dec, None, F)
        measured["note"] = "f|<=theta has degree 0 at eps; bound is trivial"
        return cert
    psi, wrep, eps_star = dual_witness(g, d, one_sided=(side == "one"))
    checks["witness.l1_one"] = psi.l1() == 1
    checks["witness.correlation"] = wrep.correlation > p.eps
    checks["witness.orth"] = wrep.orth >= d
    if side == "one":
        checks["witness.one_sided"] = wrep.one_sided_ok

    comp = compose_witness(psi, fam, p.N, p.theta, p.T, p.D, side)
    for key, v in comp.checks.items():
        checks[f"lambda_tilde.{key}"] = v
    Delta = comp.delta_measured
    measured["Delta_measured"] = _q(Delta)
    measured["Delta_formula_measured_constant"] = p.delta_formula(c_graded)
    measured["tail_max"] = _q(max(comp.tails.values(), default=Fraction(0)))
    tail_env = math.exp(-c_graded * (p.T - p.theta * p.k) / (2 * math.sqrt(p.n * p.m)))
    tail_ok = all(float(t) <= tail_env * (1 + 1e-12) for t in comp.tails.values())
    measured["tail_envelope"] = tail_env
    measured["tail_envelope_holds"] = tail_ok
    if hyp.get("T_theta_k"):
        checks["lambda.tail_envelope"] = tail_ok

    Psi = comp.Psi
    n, theta, N = p.n, p.theta, p.N
    checks["Psi.support"] = all(popcount(x) <= p.T for x in Psi.support())
    checks["Psi.l1"] = Psi.l1() <= 1 + Delta
    orth_lam = fam.measured["orth_min"]
    orth_lam = INF if orth_lam == "inf" else orth_lam
    o_Psi = orth(Psi, upto=p.D)
    need_strong = min(d * orth_lam, p.D + 1)
    need_weak = min(d * orth_lam, p.D)
    checks["Psi.orth"] = o_Psi >= need_weak
    checks["Psi.orth_strong"] = o_Psi >= need_strong
    measured["orth_Psi"] = _orth_json(o_Psi)
    measured["orth_lambda"] = _orth_json(orth_lam)

    Fd = {x: F(x) for x in range(1 << (n * theta))}
    slack = beta * theta + Delta
    ok = True
    for u in g.as_dict():
        for v in tuples_summing_to(u, N, theta):
            if v not in comp.tilde:
                comp_v = compose_witness(RationalMeasure(N, {u: 1}), fam, N, theta, p.T, p.D, side).tilde[v]
            else:
                comp_v = comp.tilde[v]
            val = sum((w * Fd[x] for x, w in comp_v.items()), Fraction(0))
            if abs(f(u) - val) > slack:
                ok = False
    checks["H_on_Lambda_tilde"] = ok

    eps_prime = p.eps - beta * theta - 2 * Delta
    corr = sum((w * Fd[x] for x, w in Psi.items()), Fraction(0))
    checks["Psi.correlation"] = corr > eps_prime * Psi.l1()
    measured["eps_prime"] = _q(eps_prime)
    measured["correlation"] = _q(corr)
    measured["Psi_l1"] = _q(Psi.l1())
    if side == "one":
        checks["Psi.nonnegative"] = all(w >= 0 for x, w in Psi.items() if Fd[x] == 1)

    short = eps_prime < 0
    bound = "inf" if short else _orth_json(o_Psi)
    if cross_check and o_Psi != INF and o_Psi >= 1:
        FT = restricted(F, min(p.T, F.arity))
        sol = best_error(FT, int(o_Psi) - 1, one_sided=(side == "one"))
        witness_value = corr / Psi.l1()
        checks["cross_check.lp_at_least_witness"] = sol.error >= witness_value
        measured["cross_check_best_error"] = _q(sol.error)
        measured["witness_value"] = _q(witness_value)
        if not short:
            checks["cross_check.bound_sound"] = sol.error > eps_prime
    return Certificate(p, side, checks, measured, bound, short, dec, Psi, F)


# ---------------------------------------------------------------- DNF flattening


def flatten_monotone(f: Dnf, dec: Decoder, absorb: bool = True) -> Dnf:
    """f o H as a monotone DNF: distribute each term of f over the terms of the H_j it uses."""
    if not f.is_monotone:
        raise ValueError("flattening needs a monotone DNF")
    if f.arity != dec.N:
        raise ValueError("arity mismatch")
    Hterms = [[sum(1 << s for s in t.pos) for t in h.terms] for h in dec.H]
    masks = set()
    for t in f.terms:
        for pick in product(*(Hterms[j] for j in sorted(t.pos))):
            x = 0
            for mk in pick:
                x |= mk
            masks.add(x)
    if absorb:
        ordered = sorted(masks, key=popcount)
        kept: list[int] = []
        for x in ordered:
            if not any(y & x == y for y in kept):
                kept.append(x)
        masks = set(kept)
    arity = dec.n * dec.theta
    terms = [Term(frozenset(i for i in range(arity) if x >> i & 1)) for x in sorted(masks)]
    return Dnf(arity, tuple(terms))


# ---------------------------------------------------------------- planners


@dataclass(frozen=True)
class PlannedParams:
    alpha: float
    A: float
    C: float
    theta: int
    beta: Fraction
    N: int
    n: int
    m: int
    k: int
    D: int
    T: int
    feasibility: dict

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha, "A": self.A, "C": self.C, "theta": self.theta,
            "beta": _q(self.beta), "N": self.N, "n": self.n, "m": self.m, "k": self.k,
            "D": self.D, "T": self.T, "feasibility": self.feasibility,
        }


def _log2sq(x: float) -> float:
    return math.log2(x) ** 2


def plan_params(alpha: float, A: float, C: float, theta: int, c: float = 1.0, c_star: float = 1.0) -> PlannedParams:
    """Parameter choices of the amplification corollary (logs base 2) with a hypothesis report."""
    if not (0 < alpha <= 1) or A < 1 or C < 1 or theta < 2:
        raise ValueError("need alpha in (0,1], A >= 1, C >= 1, theta >= 2")
    L = math.floor(theta * _log2sq(theta))
    beta = Fraction(1, 2 * theta * L ** math.ceil(A)) if float(A).is_integer() else Fraction(1 / (2 * theta * L**A))
    N = math.floor(theta**C)
    n = math.floor(theta**alpha)
    m = math.floor(theta ** (alpha / 4))
    k = math.ceil(50 * (A + C) / alpha) - 1
    D = math.ceil(theta ** (1 - 5 * alpha / 8))
    T = L
    r = N + 1
    feas = {"n_half_m_k": n / 2 >= m > k}
    try:
        lhs = 4 * r * r * k * math.exp(-math.sqrt(m) / (16 * k)) + r * (3 * c_star * math.log(n + r) ** 2 / m**0.25) ** k
        feas["balance"] = bool(m > 0 and lhs <= float(beta) / (16 * r * r * m * m))
    except (OverflowError, ZeroDivisionError):
        feas["balance"] = False
    feas["T_theta_k"] = T >= 8 * math.e / c * theta * (1 + math.log(theta)) + theta * k
    feas["T_at_least_D"] = T >= D
    feas["T_at_least_D_plus_n"] = T >= D + n
    return PlannedParams(alpha, A, C, theta, beta, N, n, m, k, D, T, feas)


def _xlog2sq(x: int) -> int:
    return 0 if x <= 1 else math.floor(x * math.log2(x) ** 2)


@dataclass(frozen=True)
class Stage:
    index: int
    T: int
    alpha: Fraction
    C: Fraction
    eps: Fraction | float


@dataclass(frozen=True)
class Schedule:
    delta: float
    Delta_exp: float
    n: int
    K: int
    A: float
    T: tuple[int, ...]
    stages: tuple[Stage, ...]
    chain_bound: tuple[bool, ...]

    def to_json(self) -> dict:
        return {
            "delta": self.delta, "Delta_exp": self.Delta_exp, "n": self.n, "K": self.K, "A": self.A,
            "T": list(self.T),
            "stages": [
                {"i": s.index, "T": s.T, "alpha": _q(s.alpha), "C": _q(s.C), "eps": _q(s.eps) if isinstance(s.eps, Fraction) else s.eps}
                for s in self.stages
            ],
            "T_chain_bound": list(self.chain_bound),
        }


def iteration_count(delta) -> int:
    """Smallest K >= 1 with (1 - (2/3)^K) / (1 + (2/3)^(K-1)) > 1 - delta, in exact arithmetic."""
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    q = Fraction(2, 3)
    K = 1
    while (1 - q**K) / (1 + q ** (K - 1)) <= 1 - delta:
        K += 1
    return K


def _log2_exact(n: int):
    """log2 n as an int when n is a power of two, else as a float."""
    return n.bit_length() - 1 if n & (n - 1) == 0 else math.log2(n)


def plan_iteration(delta, Delta_exp, n: int) -> Schedule:
    """The iteration schedule: K, the T-chain and the per-stage alpha, C and error levels.

    With x log^2 x read as 0 for x in {0, 1}; error terms 1/T^A with T = 0 are dropped.
    Arithmetic is exact whenever n is a power of two and Delta_exp is an integer.
    """
    if Delta_exp < 1 or n < 2:
        raise ValueError("need Delta_exp >= 1 and n >= 2")
    K = iteration_count(delta)
    A = 2 * Delta_exp + 3
    lg = _log2_exact(n)
    T = [math.floor(Fraction(n) / Fraction(lg) ** (2 * K)) if isinstance(lg, int) else math.floor(n / lg ** (2 * K))]
    for _ in range(K):
        T.append(_xlog2sq(T[-1]))
    stages = []
    eps = Fraction(1, 2) if float(A).is_integer() else 0.5
    q = Fraction(2, 3)
    for i in range(1, K + 1):
        if T[i - 1]:
            eps -= Fraction(1, T[i - 1] ** int(A)) if isinstance(eps, Fraction) else 1.0 / T[i - 1] ** A
        stages.append(Stage(i, T[i], q ** (i - 1), 1 + q ** (i - 2), eps))
    bound = tuple(T[i] * lg ** (2 * (K - i)) <= n for i in range(K + 1))
    return Schedule(float(delta), Delta_exp, n, K, A, tuple(T), tuple(stages), bound)
