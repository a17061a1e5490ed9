"""Command-line front end.

Every subcommand builds an experiment config, runs it through
``experiments.run`` and emits the JSON report.  Exit codes:

0  all checks passed
1  some check failed (or a regression mismatch)
2  usage error
3  config or schema error
4  resource guard tripped
5  parameter or construction error
"""
from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_SCHEMA, EXIT_RESOURCE, EXIT_PARAM = 0, 1, 2, 3, 4, 5

SHIPPED_CORPUS = Path(__file__).with_name("corpus")


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _function_spec(a) -> dict:
    if a.table:
        return {"table": a.table}
    if a.fn:
        head = next((ln.strip() for ln in Path(a.fn).read_text().splitlines() if ln.strip() and not ln.startswith("#")), "")
        if head.startswith("n="):
            return {"path": a.fn}
        return {"dnf": Path(a.fn).read_text()} | ({"arity": a.n} if a.n else {})
    if a.dnf_file:
        return {"dnf": Path(a.dnf_file).read_text()} | ({"arity": a.n} if a.n else {})
    if a.tt_file:
        return {"path": a.tt_file}
    spec = {"builtin": a.builtin, "n": a.n}
    for key in ("t", "m", "k"):
        v = getattr(a, key, None)
        if v is not None:
            spec[key] = v
    return spec


def _coloring_spec(a) -> dict:
    if a.coloring:
        d = json.loads(Path(a.coloring).read_text())
        return {"source": "z" if "z" in d else "table", **d}
    if a.z:
        return {"source": "z", "z": _ints(a.z), "k": a.k, "r": a.r}
    spec = {"source": a.source, "n": a.n, "k": a.k, "r": a.r, "seed": a.seed}
    if a.source == "explicit":
        spec["m"] = a.m
    return spec


def _config(a) -> dict:
    cmd = a.command
    if cmd == "run":
        return json.loads(Path(a.config).read_text())
    if cmd == "disc":
        p = {"modulus": a.modulus, "method": a.method}
        if a.elements:
            p["elements"] = _ints(a.elements)
        elif a.file:
            from .numtheory import read_residues

            p["elements"] = read_residues(a.file, a.modulus).elements()
        else:
            p["range"] = a.range or [0, a.modulus]
        return {"kind": "disc", "params": p}
    if cmd == "lowdisc":
        p = {"M": a.M, "t": a.t}
        if a.c_star is not None:
            p["c_star"] = a.c_star
        return {"kind": "lowdisc", "params": p}
    if cmd == "color":
        p = {"action": a.action, "coloring": _coloring_spec(a)}
        if a.action == "verify":
            p.update(eps=a.eps, delta=a.delta, m=a.m, mode=a.mode, samples=a.samples)
        if a.action == "guarantee":
            p.update(m=a.m, beta=a.beta, zeta=a.zeta)
        return {"kind": "color", "params": p, "seed": a.seed}
    if cmd == "adeg":
        p = {"function": _function_spec(a), "eps": a.eps, "one_sided": a.one_sided}
        if a.window:
            p["window"] = a.window
        return {"kind": "adeg", "params": p}
    if cmd == "gadget":
        p = {"gadget": a.gadget.replace("-", "_")}
        for key in ("n", "target", "D", "B", "y", "theta", "T", "k", "measure"):
            v = getattr(a, key, None)
            if v is not None:
                p[key] = v
        if p["gadget"] == "onesided":
            p["gadget"] = "onesided_corrector"
        return {"kind": "gadget", "params": p}
    if cmd in ("amplify", "schedule"):
        action = "schedule" if cmd == "schedule" else a.action
        if action == "run":
            cfg = json.loads(Path(a.config).read_text())
            if "kind" not in cfg:
                cfg = {"kind": "amplify", "params": cfg}
            p = cfg["params"]
            if a.one_sided:
                p["side"] = "one"
            if a.toy_waive_balance:
                p["waive_hypotheses"] = True
            if a.cross_check:
                p["cross_check"] = True
            return cfg
        if action == "plan":
            return {"kind": "plan", "params": {"alpha": a.alpha, "A": a.A, "C": a.C, "theta": a.theta}}
        return {"kind": "schedule", "params": {"delta": a.delta, "Delta": a.Delta, "n": a.n}}
    raise AssertionError(cmd)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the JSON report here instead of stdout")
    common.add_argument("--out", metavar="DIR", help="directory for artifacts (measures, DNFs, certificates)")
    common.add_argument("--threads", type=int, help="cap on numeric library threads")
    ap = argparse.ArgumentParser(prog="adeglab", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    s = cmd("run", help="run an experiment config")
    s.add_argument("--config", required=True)

    s = cmd("disc", help="m-discrepancy of a residue multiset")
    s.add_argument("--modulus", type=int, required=True)
    s.add_argument("--elements", help="comma or space separated residues")
    s.add_argument("--file", "--set", dest="file", help="residue file, one integer per line")
    s.add_argument("--range", type=int, nargs=2, metavar=("LO", "HI"))
    s.add_argument("--method", choices=["auto", "direct", "fft"], default="auto")

    s = cmd("lowdisc", help="explicit low-discrepancy set")
    s.add_argument("--M", "--modulus", dest="M", type=int, required=True)
    s.add_argument("--t", "--budget", dest="t", type=int, required=True)
    s.add_argument("--c-star", type=float)
    s.add_argument("--emit", metavar="PATH", help="also write the residues here, one per line")

    s = cmd("color", help="build, verify or bound a balanced coloring")
    s.add_argument("action", choices=["build", "verify", "guarantee"])
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--r", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--source", choices=["random", "explicit"], default="random")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--z", help="seed integers, comma separated")
    s.add_argument("--coloring", help="coloring JSON file")
    s.add_argument("--eps", default="1/2")
    s.add_argument("--delta", default="1/2")
    s.add_argument("--mode", choices=["exhaustive", "monte-carlo"], default="exhaustive")
    s.add_argument("--samples", type=int, default=2000)
    s.add_argument("--beta", type=float, default=0.5)
    s.add_argument("--zeta", type=float, default=0.5)

    s = cmd("adeg", help="exact (one-sided) approximate degree")
    s.add_argument("--builtin", choices=["or", "and", "parity", "threshold", "constant", "dictator", "disj", "not"], default="or")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--t", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--table", help="truth table as a 0/1 string, point 0 first")
    s.add_argument("--fn", help="truth-table file (header n=...) or DNF file")
    s.add_argument("--dnf-file")
    s.add_argument("--tt-file")
    s.add_argument("--emit-witness", metavar="PATH", help="write the dual witness here (measure file format)")
    s.add_argument("--eps", default="1/3")
    s.add_argument("--one-sided", action="store_true")
    s.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"))

    s = cmd("gadget", help="OR dual, correctors and truncation")
    s.add_argument("gadget", choices=["or-dual", "corrector", "corrector-at", "onesided", "truncate"])
    for name in ("n", "target", "D", "B", "theta", "T", "k"):
        s.add_argument(f"--{name}", type=int)
    s.add_argument("--y", help="anchor point as a bit string, bit 0 first")
    s.add_argument("--measure", help="measure file for truncate")

    for name in ("amplify", "schedule"):
        s = cmd(name, help="amplification pipeline and planners" if name == "amplify" else "iteration schedule")
        if name == "amplify":
            s.add_argument("action", choices=["run", "plan", "schedule"])
            s.add_argument("--config")
            s.add_argument("--one-sided", action="store_true")
            s.add_argument("--toy-waive-balance", action="store_true", help="record the analytic hypotheses instead of enforcing them")
            s.add_argument("--cross-check", action="store_true", help="solve the composed LP directly as well")
            s.add_argument("--alpha", type=float)
            s.add_argument("--A", type=float)
            s.add_argument("--C", type=float)
            s.add_argument("--theta", type=int)
        s.add_argument("--delta", default="1")
        s.add_argument("--Delta", type=float, default=1.0)
        s.add_argument("--n", type=int, default=1 << 16)

    s = cmd("verify-all", help="rerun a regression corpus")
    s.add_argument("corpus", nargs="?", default=str(SHIPPED_CORPUS))
    return ap


def _emit(obj: dict, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    if a.threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
            os.environ[var] = str(a.threads)

    from .amplifier import ConstructionError
    from .duals import GadgetError
    from .experiments import SchemaError, run, verify_all
    from .hypercube import ResourceError
    from .lp import LPError
    from .numtheory import ParameterError

    try:
        if a.command == "verify-all":
            summary = verify_all(a.corpus)
            _emit(summary, a.json)
            for name, e in summary["entries"].items():
                if not e["ok"]:
                    print(f"MISMATCH {name}: " + "; ".join(e["mismatches"]), file=sys.stderr)
            return EXIT_OK if summary["passed"] else EXIT_CHECK
        if a.command == "amplify" and a.action == "run" and not a.config:
            ap.error("amplify run needs --config")
        out = a.out
        if getattr(a, "emit_witness", None) and not out:
            out = tempfile.mkdtemp(prefix="adeglab-")
        report = run(_config(a), out)
        if getattr(a, "emit_witness", None) and (Path(out) / "witness.measure").exists():
            shutil.copyfile(Path(out) / "witness.measure", a.emit_witness)
    except (SchemaError, json.JSONDecodeError, FileNotFoundError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except ResourceError as e:
        print(f"resource guard: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ParameterError, ConstructionError, GadgetError, LPError, ValueError) as e:
        print(f"parameter error: {e}", file=sys.stderr)
        return EXIT_PARAM
    if a.threads:
        report["timing"]["threads"] = a.threads
    if getattr(a, "emit", None):
        from .numtheory import build_lowdisc_set, write_residues

        write_residues(a.emit, build_lowdisc_set(a.M, a.t, a.c_star).multiset)
    _emit(report, a.json)
    if not report["passed"]:
        failed = [k for k, v in report["checks"].items() if not v]
        print("FAILED checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
