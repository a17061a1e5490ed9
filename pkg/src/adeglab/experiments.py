"""Experiment configs, dispatch and JSON reports.

A config is ``{"kind": ..., "params": {...}, "seed": int}``.  ``run`` returns a
report dict whose ``checks`` and ``values`` sections are deterministic; wall
clock lives under ``timing``.  Rationals are written as "num/den" strings.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from fractions import Fraction
from pathlib import Path

import jsonschema

from . import __version__
from .adeg import RealFunction, adeg, onedeg, restricted
from .amplifier import (
    AmplifierParams,
    ConstructionError,
    amplify,
    flatten_monotone,
    plan_iteration,
    plan_params,
)
from .coloring import Coloring, balance_guarantee, explicit_coloring, random_coloring, verify_balance
from .duals import GadgetError, corrector, corrector_at, onesided_corrector, or_dual, truncate, write_gadget
from .hypercube import (
    Dnf,
    ResourceError,
    TruthTable,
    and_fn,
    constant_fn,
    dictator_fn,
    disj,
    dnf_to_truth_table,
    or_fn,
    parity_fn,
    read_truth_table,
    str_to_point,
    threshold_fn,
    write_dnf,
)
from .numtheory import ParameterError, ResidueMultiset, build_lowdisc_set, discrepancy
from .poly import INF, read_measure, write_measure

KINDS = ("disc", "lowdisc", "color", "adeg", "gadget", "amplify", "plan", "schedule")

RATIONAL = {"type": ["string", "integer"], "pattern": r"^-?\d+(/\d+)?$"}
FUNCTION = {
    "type": "object",
    "properties": {
        "builtin": {"enum": ["or", "and", "parity", "threshold", "constant", "dictator", "disj", "not"]},
        "n": {"type": "integer", "minimum": 0},
        "t": {"type": "integer"},
        "m": {"type": "integer"},
        "k": {"type": "integer"},
        "table": {"type": "string", "pattern": "^[01]+$"},
        "dnf": {"type": "string"},
        "arity": {"type": "integer"},
        "path": {"type": "string"},
    },
}
COLORING = {
    "type": "object",
    "properties": {
        "source": {"enum": ["random", "explicit", "z", "table"]},
        "n": {"type": "integer", "minimum": 1},
        "k": {"type": "integer", "minimum": 1},
        "r": {"type": "integer", "minimum": 1},
        "m": {"type": "integer"},
        "seed": {"type": "integer"},
        "z": {"type": "array", "items": {"type": "integer"}},
        "table": {"type": "array", "items": {"type": "integer"}},
    },
    "required": ["source"],
}

PARAMS = {
    "disc": {
        "type": "object",
        "properties": {
            "modulus": {"type": "integer", "minimum": 2},
            "elements": {"type": "array", "items": {"type": "integer"}},
            "range": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
            "method": {"enum": ["auto", "direct", "fft"]},
        },
        "required": ["modulus"],
    },
    "lowdisc": {
        "type": "object",
        "properties": {"M": {"type": "integer", "minimum": 2}, "t": {"type": "integer", "minimum": 2}, "c_star": {"type": "number"}},
        "required": ["M", "t"],
    },
    "color": {
        "type": "object",
        "properties": {
            "action": {"enum": ["build", "verify", "guarantee"]},
            "coloring": COLORING,
            "eps": RATIONAL,
            "delta": RATIONAL,
            "m": {"type": "integer"},
            "mode": {"enum": ["exhaustive", "monte-carlo"]},
            "samples": {"type": "integer", "minimum": 1},
            "beta": {"type": "number"},
            "zeta": {"type": "number"},
        },
        "required": ["action", "coloring"],
    },
    "adeg": {
        "type": "object",
        "properties": {
            "function": FUNCTION,
            "eps": RATIONAL,
            "one_sided": {"type": "boolean"},
            "window": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        },
        "required": ["function", "eps"],
    },
    "gadget": {
        "type": "object",
        "properties": {
            "gadget": {"enum": ["or_dual", "corrector", "corrector_at", "onesided_corrector", "truncate"]},
            "n": {"type": "integer"},
            "target": {"type": "integer"},
            "D": {"type": "integer"},
            "B": {"type": "integer"},
            "y": {"type": "string", "pattern": "^[01]+$"},
            "theta": {"type": "integer"},
            "T": {"type": "integer"},
            "k": {"type": "integer"},
            "measure": {"type": "string"},
        },
        "required": ["gadget"],
    },
    "amplify": {
        "type": "object",
        "properties": {
            "params": {
                "type": "object",
                "properties": {
                    "n": {"type": "integer"}, "m": {"type": "integer"}, "k": {"type": "integer"},
                    "N": {"type": "integer"}, "theta": {"type": "integer"}, "D": {"type": "integer"},
                    "T": {"type": "integer"}, "beta": {"oneOf": [RATIONAL, {"type": "null"}]}, "eps": RATIONAL,
                    "omega_target": {"type": ["integer", "null"]},
                },
                "required": ["n", "m", "k", "N", "theta", "D", "T"],
            },
            "side": {"enum": ["two", "one"]},
            "function": FUNCTION,
            "coloring": COLORING,
            "cross_check": {"type": "boolean"},
            "waive_hypotheses": {"type": "boolean"},
            "flatten": {"type": "boolean"},
        },
        "required": ["params", "function", "coloring"],
    },
    "plan": {
        "type": "object",
        "properties": {"alpha": {"type": "number"}, "A": {"type": "number"}, "C": {"type": "number"}, "theta": {"type": "integer"}},
        "required": ["alpha", "A", "C", "theta"],
    },
    "schedule": {
        "type": "object",
        "properties": {"delta": {"type": ["number", "string"]}, "Delta": {"type": "number"}, "n": {"type": "integer"}},
        "required": ["delta", "Delta", "n"],
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(KINDS)},
        "params": {"type": "object"},
        "seed": {"type": "integer"},
        "name": {"type": "string"},
    },
    "required": ["kind", "params"],
    "allOf": [
        {"if": {"properties": {"kind": {"const": k}}}, "then": {"properties": {"params": s}}} for k, s in PARAMS.items()
    ],
}

REPORT_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(KINDS)},
        "config": {"type": "object"},
        "passed": {"type": "boolean"},
        "checks": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "values": {"type": "object"},
        "measured": {"type": "object"},
        "artifacts": {"type": "object", "additionalProperties": {"type": "string"}},
        "timing": {"type": "object"},
        "version": {"type": "string"},
    },
    "required": ["kind", "config", "passed", "checks", "values", "timing"],
}


class SchemaError(ValueError):
    pass


class CheckFailure(RuntimeError):
    pass


def validate_config(config: dict) -> None:
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise SchemaError(e.message) from e


def validate_report(report: dict) -> None:
    jsonschema.validate(report, REPORT_SCHEMA)


def q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _frac(x) -> Fraction:
    return Fraction(x) if isinstance(x, (int, str)) else Fraction(x).limit_denominator(10**12)


def _jsonable(x):
    if isinstance(x, Fraction):
        return q(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if x == INF:
        return "inf"
    if hasattr(x, "item"):
        return x.item()
    return x


# ---------------------------------------------------------------- builders


def build_function(spec: dict) -> TruthTable:
    if "table" in spec:
        bits = spec["table"]
        arity = int(math.log2(len(bits)))
        if 1 << arity != len(bits):
            raise SchemaError("table length must be a power of two")
        return TruthTable.from_values(arity, [int(c) for c in bits])
    if "dnf" in spec:
        return dnf_to_truth_table(Dnf.from_text(spec["dnf"], spec.get("arity")))
    if "path" in spec:
        return read_truth_table(spec["path"])
    kind = spec.get("builtin")
    n = spec.get("n", 1)
    if kind == "or":
        return or_fn(n)
    if kind == "and":
        return and_fn(n)
    if kind == "parity":
        return parity_fn(n)
    if kind == "threshold":
        return threshold_fn(n, spec["t"])
    if kind == "constant":
        return constant_fn(n, spec.get("t", 0))
    if kind == "dictator":
        return dictator_fn(n, spec.get("t", 0))
    if kind == "disj":
        return disj(spec["m"], spec["k"])
    if kind == "not":
        return dictator_fn(1, 0).complement()
    raise SchemaError(f"cannot build function from {spec}")


def build_coloring(spec: dict) -> tuple[Coloring, dict]:
    src = spec["source"]
    if src == "random":
        return random_coloring(spec["n"], spec["k"], spec["r"], spec.get("seed", 0)), {}
    if src == "explicit":
        ec = explicit_coloring(spec["n"], spec["m"], spec["k"], spec["r"])
        return ec.coloring, {"n_prime": ec.n_prime, "copies": ec.copies, "branch": ec.branch}
    if src == "z":
        return Coloring(len(spec["z"]), spec["k"], spec["r"], z=tuple(spec["z"])), {}
    if src == "table":
        return Coloring(spec["n"], spec["k"], spec["r"], table=tuple(spec["table"])), {}
    raise SchemaError(f"unknown coloring source {src!r}")


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------- runners


def _run_disc(p: dict, out: Path | None):
    M = p["modulus"]
    if "elements" in p:
        s = ResidueMultiset.of(M, p["elements"])
    else:
        lo, hi = p.get("range", [0, M])
        s = ResidueMultiset.of(M, range(lo, hi))
    d = discrepancy(s, p.get("method", "auto"))
    values = {"disc": d.value, "disc_upper": q(d.upper), "size": len(s)}
    checks = {"enclosure": d.lower <= Fraction(d.value) <= d.upper or d.upper - d.lower < Fraction(1, 10**9)}
    return checks, values, {"error_bound": d.error, "method": d.method, "argmax": d.argmax}, {}


def _run_lowdisc(p: dict, out: Path | None):
    low = build_lowdisc_set(p["M"], p["t"], p.get("c_star"))
    s = low.multiset
    d = discrepancy(s)
    elems = s.elements()
    checks = {
        "size_at_most_t": len(s) <= p["t"],
        "distinct": len(set(elems)) == len(elems),
        "nonzero": all(e % p["M"] for e in elems),
    }
    if low.branch == "full":
        checks["nonzero"] = True  # all of Z_M: the residue 0 appears as M
    values = {"size": len(s), "branch": low.branch, "disc": d.value, "elements_sha256": hashlib.sha256(s.to_text().encode()).hexdigest()}
    arts = {}
    if out is not None:
        path = out / "lowdisc.txt"
        path.write_text(s.to_text())
        arts[path.name] = _digest(path)
    return checks, values, {"P": low.P, "R": low.R, "primes": list(low.primes)}, arts


def _run_color(p: dict, out: Path | None):
    c, extra = build_coloring(p["coloring"])
    action = p["action"]
    arts = {}
    measured = dict(extra)
    if action == "build":
        sizes = c.class_sizes()
        checks = {"all_classes_nonempty": all(sizes)}
        values = {"class_sizes": sizes, "n": c.n, "k": c.k, "r": c.r}
        if out is not None:
            path = out / "coloring.json"
            path.write_text(json.dumps(c.to_json(), sort_keys=True) + "\n")
            arts[path.name] = _digest(path)
        return checks, values, measured, arts
    if action == "verify":
        cert = verify_balance(c, _frac(p["eps"]), _frac(p["delta"]), p["m"], p.get("mode", "exhaustive"), p.get("samples", 2000), p.get("seed", 0))
        return {"balanced": cert.passed}, cert.to_json(), measured, arts
    if action == "guarantee":
        if c.z is None:
            raise SchemaError("guarantee needs a z-seeded coloring")
        g = balance_guarantee(list(c.z), c.r, p["m"], c.k, p.get("beta", 0.5), p.get("zeta", 0.5))
        values = {"eps": g.eps, "delta": g.delta, "disc": g.disc}
        vacuous = g.eps >= 1 or g.delta >= 1
        if vacuous:
            checks = {"no_contradiction": True}
        else:
            cert = verify_balance(c, Fraction(g.eps), Fraction(g.delta), p["m"])
            checks = {"no_contradiction": cert.passed}
        measured["vacuous"] = vacuous
        return checks, values, measured, arts
    raise SchemaError(f"unknown color action {action!r}")


def _run_adeg(p: dict, out: Path | None):
    f = build_function(p["function"])
    g = restricted(f, p["window"][1], p["window"][0]) if "window" in p else f
    eps = _frac(p["eps"])
    res = (onedeg if p.get("one_sided") else adeg)(g, eps)
    checks = {"duality_consistent": res.consistent(g)}
    values = {"degree": _jsonable(res.degree), "primal_error": q(res.primal_error) if res.primal_error is not None else None}
    if res.witness_report is not None:
        w = res.witness_report
        values["witness"] = {"correlation": q(w.correlation), "l1": q(w.l1), "orth": _jsonable(w.orth)}
        checks["witness_certifies"] = w.certifies(res.degree, eps, bool(p.get("one_sided")))
    measured = {"error_profile": {str(k): q(v) for k, v in res.errors.items()}}
    arts = {}
    if out is not None and res.witness is not None:
        path = out / "witness.measure"
        write_measure(res.witness, path)
        arts[path.name] = _digest(path)
    return checks, values, measured, arts


def _run_gadget(p: dict, out: Path | None):
    kind = p["gadget"]
    if kind == "or_dual":
        w = or_dual(p["n"], p["target"])
        meta = w.metadata()
        measure, checks = w.lift() if p["n"] <= 16 else None, w.check()
        values = {"omega": [q(v) for v in w.values], "orth": meta["orth"], "omega_at_zero": meta["omega_at_zero"]}
    elif kind in ("corrector", "corrector_at"):
        if kind == "corrector":
            z = corrector(p["n"], p["D"])
        else:
            z = corrector_at(str_to_point(p["y"]), p["D"], p.get("B", len(p["y"])))
        meta = z.metadata()
        measure, checks = z.measure, z.check()
        values = {"l1": meta["l1"], "l1_bound": meta["l1_bound"], "support_size": len(z.measure)}
    elif kind == "onesided_corrector":
        z = onesided_corrector(str_to_point(p["y"]), p["n"], p["theta"], p["D"], p["T"], p["k"])
        measure, checks = z.measure, z.check()
        meta = {"pivot_block": z.pivot_block, "checks": checks, "l1_bound": q(z.l1_bound)}
        values = {"l1": q(z.measure.l1()), "pivot_block": z.pivot_block, "support_size": len(z.measure)}
    elif kind == "truncate":
        phi = read_measure(p["measure"])
        tr = truncate(phi, p["T"], p["D"])
        measure, checks = tr.truncated, tr.check()
        meta = {"heavy_mass": q(tr.heavy_mass), "factor": q(tr.factor), "checks": checks}
        values = {"removed_l1": q(tr.removed.l1()), "heavy_mass": q(tr.heavy_mass), "support_size": len(tr.truncated)}
    else:
        raise SchemaError(f"unknown gadget {kind!r}")
    arts = {}
    if out is not None and measure is not None:
        path = out / f"{kind}.measure"
        write_gadget(measure, _jsonable(meta), path)
        arts[path.name] = _digest(path)
        arts[path.name + ".json"] = _digest(Path(str(path) + ".json"))
    return checks, values, _jsonable(meta), arts


def _run_amplify(p: dict, out: Path | None):
    params = AmplifierParams.from_json(p["params"])
    f = build_function(p["function"])
    gamma, extra = build_coloring(p["coloring"])
    side = p.get("side", "two")
    cert = amplify(f, params, gamma, side, p.get("cross_check", False), p.get("waive_hypotheses", False))
    checks = {k: bool(v) for k, v in cert.checks.items()}
    values = {
        "certified_bound": cert.certified_bound,
        "short_circuit": cert.short_circuit,
        "d": cert.measured.get("d"),
        "orth_Psi": cert.measured.get("orth_Psi"),
        "eps_prime": cert.measured.get("eps_prime"),
        "Delta_measured": cert.measured.get("Delta_measured"),
        "beta_measured": cert.measured["family"]["beta_measured"],
        "Psi_sha256": None if cert.Psi is None else hashlib.sha256(cert.Psi.to_text().encode()).hexdigest(),
    }
    measured = _jsonable(cert.measured)
    measured.update(extra)
    if p.get("flatten") and "dnf" in p["function"]:
        fd = Dnf.from_text(p["function"]["dnf"], p["function"].get("arity"))
        flat = flatten_monotone(fd, cert.decoder)
        checks["flatten.width"] = flat.width <= fd.width * (params.k + 1)
        checks["flatten.monotone"] = flat.is_monotone
        checks["flatten.equal"] = bool((dnf_to_truth_table(flat).values == cert.composed.values).all())
        values["flatten_size"] = flat.size
        values["flatten_width"] = flat.width
    arts = {}
    if out is not None:
        for j, d in enumerate(cert.decoder.H, start=1):
            path = out / f"H_{j}.dnf"
            write_dnf(d, path)
            arts[path.name] = _digest(path)
        if cert.Psi is not None:
            path = out / "Psi.measure"
            write_measure(cert.Psi, path)
            arts[path.name] = _digest(path)
        path = out / "certificate.json"
        path.write_text(json.dumps(_jsonable(cert.to_json()), indent=2, sort_keys=True) + "\n")
        arts[path.name] = _digest(path)
    return checks, values, measured, arts


def _run_plan(p: dict, out: Path | None):
    pp = plan_params(p["alpha"], p["A"], p["C"], p["theta"])
    js = pp.to_json()
    return {}, {k: v for k, v in js.items() if k != "feasibility"}, {"feasibility": js["feasibility"]}, {}


def _run_schedule(p: dict, out: Path | None):
    s = plan_iteration(_frac(p["delta"]), p["Delta"], p["n"])
    js = s.to_json()
    return {"T_chain_bound": all(s.chain_bound)}, js, {}, {}


RUNNERS = {
    "disc": _run_disc,
    "lowdisc": _run_lowdisc,
    "color": _run_color,
    "adeg": _run_adeg,
    "gadget": _run_gadget,
    "amplify": _run_amplify,
    "plan": _run_plan,
    "schedule": _run_schedule,
}


def run(config: dict, out_dir: str | Path | None = None) -> dict:
    """Validate, dispatch and assemble the report.  ``passed`` is True iff every check holds."""
    validate_config(config)
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    checks, values, measured, arts = RUNNERS[config["kind"]](config["params"], out)
    report = {
        "kind": config["kind"],
        "config": config,
        "passed": all(checks.values()),
        "checks": {k: bool(v) for k, v in checks.items()},
        "values": _jsonable(values),
        "measured": _jsonable(measured),
        "artifacts": arts,
        "timing": {"wall_seconds": round(time.perf_counter() - t0, 6)},
        "version": __version__,
    }
    validate_report(report)
    return report


# ---------------------------------------------------------------- regression corpus


def _compare(expected, actual, path: str, out: list[str], tol: float) -> None:
    if isinstance(expected, dict) and isinstance(actual, dict):
        for k in expected:
            if k not in actual:
                out.append(f"{path}.{k}: missing")
            else:
                _compare(expected[k], actual[k], f"{path}.{k}", out, tol)
        return
    if isinstance(expected, list) and isinstance(actual, list) and len(expected) == len(actual):
        for i, (a, b) in enumerate(zip(expected, actual)):
            _compare(a, b, f"{path}[{i}]", out, tol)
        return
    if isinstance(expected, float) or isinstance(actual, float):
        if isinstance(expected, (int, float)) and isinstance(actual, (int, float)) and not isinstance(expected, bool):
            if abs(expected - actual) <= tol:
                return
        out.append(f"{path}: expected {expected!r}, got {actual!r}")
        return
    if expected != actual:
        out.append(f"{path}: expected {expected!r}, got {actual!r}")


def compare_reports(expected: dict, actual: dict, tol: float = 1e-9) -> list[str]:
    """Mismatches between the deterministic sections of two reports."""
    out: list[str] = []
    for sec in ("passed", "checks", "values"):
        if sec not in expected:
            continue
        _compare(expected[sec], actual.get(sec), sec, out, tol)
    return out


def verify_all(corpus: str | Path) -> dict:
    """Rerun every ``NAME.config.json`` and compare with ``NAME.expected.json``."""
    corpus = Path(corpus)
    entries = {}
    for cfg_path in sorted(corpus.glob("*.config.json")):
        name = cfg_path.name[: -len(".config.json")]
        exp_path = corpus / f"{name}.expected.json"
        config = json.loads(cfg_path.read_text())
        try:
            report = run(config)
        except (ParameterError, ConstructionError, GadgetError, SchemaError, ResourceError, ValueError) as e:
            entries[name] = {"ok": False, "mismatches": [f"error: {e}"]}
            continue
        if not exp_path.exists():
            entries[name] = {"ok": False, "mismatches": ["expected report missing"]}
            continue
        mism = compare_reports(json.loads(exp_path.read_text()), report)
        entries[name] = {"ok": not mism, "mismatches": mism, "seconds": report["timing"]["wall_seconds"]}
    return {"passed": all(e["ok"] for e in entries.values()), "entries": entries, "count": len(entries)}
