"""Batch front end: search, lp, certify, construct, sweep, bench.

Exit codes: 0 success, 1 verification failure, 2 precondition or cap
violation, 3 precision ambiguity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from mpmath import iv

from . import arith, certificate, construction, lpcore, pfsearch
from .intervals import AmbiguousFloorError, certified_compare

OK, VERIFY_FAILED, PRECONDITION, PRECISION = 0, 1, 2, 3


class UsageError(ValueError):
    """Bad parameter combination; maps to exit code 2."""


@dataclass
class RunConfig:
    subcommand: str
    n: int | None = None
    range: tuple[int, int] | None = None
    X: int | None = None
    k: int | None = None
    N: int | None = None
    lo: int | None = None
    hi: int | None = None
    fmt: str = "json"
    output: Path | None = None
    budget: float = math.inf
    threads: int = 1
    extra: dict = field(default_factory=dict)


def _int(text: str) -> int:
    """Integer that may be written as 1e7 or 10**6."""
    text = text.strip()
    if "**" in text:
        base, exp = text.split("**")
        return int(base) ** int(exp)
    try:
        return int(text)
    except ValueError:
        f = float(text)
        if not f.is_integer():
            raise argparse.ArgumentTypeError(f"not an integer: {text}")
        return int(f)


def _budget(text: str) -> float:
    return math.inf if text in ("inf", "none") else float(_int(text))


def _range(text: str) -> tuple[int, int]:
    a, sep, b = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError("range must look like a..b")
    lo, hi = _int(a), _int(b)
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text}")
    return lo, hi


def _pair(text: str) -> tuple[int, int]:
    a, _, b = text.partition(",")
    return int(a), int(b)


# --- rendering ---------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, separators=(",", ":"))
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render(payload, fmt: str) -> str:
    rows = payload if isinstance(payload, list) else [payload]
    if fmt == "json":
        return json.dumps(payload, indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        header = list(rows[0]) if rows else []
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(r.get(h)) for h in header])
        return buf.getvalue().rstrip("\n")
    blocks = []
    for r in rows:
        blocks.append("\n".join(f"{key}: {_cell(val)}" for key, val in r.items()))
    return "\n\n".join(blocks)


# --- subcommands -------------------------------------------------------------


def _search_one(args: tuple[int, float, int]) -> dict:
    n, budget, cap = args
    return pfsearch.max_product_free(n, budget=budget, cap=cap).to_json()


def cmd_search(cfg: RunConfig):
    cap = cfg.extra.get("cap", pfsearch.SEARCH_CAP)
    if cfg.n is not None:
        return OK, _search_one((cfg.n, cfg.budget, cap))
    a, b = cfg.range
    if b > cap:
        raise UsageError(f"range end {b} above search cap {cap}")
    jobs = [(n, cfg.budget, cap) for n in range(a, b + 1)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(_search_one, jobs))
    else:
        results = [_search_one(j) for j in jobs]
    if cfg.fmt == "csv":
        results = [{"n": r["n"], "density": r["density"], "optimal": r["optimal"]} for r in results]
    return OK, results


def cmd_lp(cfg: RunConfig):
    n = cfg.n
    max_vars = cfg.extra.get("cap", lpcore.LP_VARIABLE_CAP)
    primal = lpcore.build_primal(n)
    dual = lpcore.build_dual(n)
    if len(dual.variables) > max_vars:
        raise lpcore.LpSizeError(f"dual of n={n} has {len(dual.variables)} variables, cap {max_vars}")
    export = cfg.extra.get("export")
    if export:
        Path(export).write_text(lpcore.write_lp(primal))
    p = lpcore.solve(primal, max_vars)
    d = lpcore.solve(dual, max_vars)
    gap = p.objective_value - d.objective_value
    report = {
        "n": n,
        "primal_optimum": str(p.objective_value),
        "dual_optimum": str(d.objective_value),
        "duality_gap": str(gap),
        "rows": len(primal.constraints),
        "variables": len(primal.variables),
        "pivots": p.pivot_count + d.pivot_count,
        "alpha": {k: str(v) for k, v in p.assignment.items()},
    }
    if export:
        report["export"] = str(export)
    return (OK if gap == 0 else VERIFY_FAILED), report


def cmd_certify(cfg: RunConfig):
    check = cfg.extra.get("check")
    if check:
        doc = json.loads(Path(check).read_text())
        cert = certificate.DualCertificate.from_json(doc)
        rep = certificate.verify_feasibility(cert)
        out = {
            "file": str(check),
            "feasible": rep.feasible,
            "objective": str(cert.objective),
            "failures": [c.name + (f": {c.detail}" if c.detail else "") for c in rep.failures()],
            "witness": rep.witness,
        }
        return (OK if rep.feasible else VERIFY_FAILED), out
    if cfg.n is not None:
        bound = certificate.density_upper_bound(cfg.n, X=cfg.X, k=cfg.k, N=cfg.N)
        cert = bound.certificate
        out = bound.to_json()
    else:
        cert = certificate.build_certificate(cfg.X, cfg.N, cfg.k, restrict=cfg.extra.get("restrict", False))
        out = {
            "X": cert.X,
            "k": cert.k,
            "N": str(cert.N),
            "A": str(cert.A),
            "objective": str(cert.objective),
            "bound": str(cert.bound),
            "feasible": cert.feasible,
            "failures": [c.name for c in cert.report.failures()],
        }
    emit = cfg.extra.get("emit")
    if emit:
        if cert is None:
            raise UsageError("no certificate was built for this input (X <= 1 or N = 1)")
        Path(emit).write_text(json.dumps(cert.to_json(), indent=2))
        out["certificate_file"] = str(emit)
    ok = cert is None or cert.feasible
    return (OK if ok else VERIFY_FAILED), out


def cmd_construct(cfg: RunConfig):
    fam = construction.build_family(cfg.extra["x"], cfg.lo, cfg.hi)
    transcript = construction.verify_product_free_structural(fam)
    out = fam.to_json(transcript.digest())
    out["n_x"] = str(fam.n_x)
    out["transcript_valid"] = transcript.valid
    lb = construction.lower_bound_formula(fam.x, fam.lo, fam.hi)
    out["lower_bound_rhs"] = str(lb.target_rhs)
    out["lower_bound_holds"] = lb.holds
    ok = transcript.valid and lb.holds
    if cfg.extra.get("materialize"):
        S = construction.materialize(fam)
        out["materialized_size"] = len(S)
        out["materialized_density"] = str(S.density)
        out["residue_check"] = pfsearch.is_product_free(S)
        ok = ok and out["residue_check"] and S.density == fam.density
    return (OK if ok else VERIFY_FAILED), out


def simple_bound_holds(value: Fraction, n: int) -> bool:
    """value < 1 - 1/(3 log log n), decided on a certified enclosure."""
    return certified_compare(value, lambda: 1 - 1 / (3 * iv.log(iv.log(iv.mpf(n))))) < 0


def cmd_sweep(cfg: RunConfig):
    a, b = cfg.range if cfg.range else (cfg.n, cfg.n)
    if a < 3:
        raise UsageError("sweep needs n >= 3 so that log log n > 0")
    rows = []
    ok = True
    for n in range(a, b + 1):
        rhs = 1 - 1 / (3 * math.log(math.log(n)))
        bound = certificate.density_upper_bound(n).certified_upper_bound_on_DN
        row = {"n": n, "D": None, "optimal": None, "simple_bound": f"~{rhs:.10f}", "certificate_bound": str(bound)}
        if n <= pfsearch.SEARCH_CAP:
            res = pfsearch.max_product_free(n, budget=cfg.budget)
            row["D"], row["optimal"] = str(res.density), res.proof_of_optimality
            row["D_le_simple"] = simple_bound_holds(res.density, n)
            row["D_le_certificate"] = res.density <= bound
            ok = ok and row["D_le_simple"] and row["D_le_certificate"]
        else:
            row["D_le_simple"] = row["D_le_certificate"] = None
        rows.append(row)
    return (OK if ok else VERIFY_FAILED), rows


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def cmd_bench(cfg: RunConfig):
    rows = []
    ex = cfg.extra
    if ex.get("sieve"):
        X = ex["sieve"]
        sv, dt = _timed(lambda: arith.omega_sieve(X, workers=cfg.threads))
        rows.append({"task": "omega_sieve", "param": X, "seconds": f"~{dt:.4f}", "rate": f"~{X / dt:.4g}/s", "check": int(sv.table[-1])})
    if ex.get("simplex"):
        n = ex["simplex"]
        sol, dt = _timed(lambda: lpcore.solve(lpcore.build_dual(n)))
        rows.append({"task": "simplex_dual", "param": n, "seconds": f"~{dt:.4f}", "rate": f"~{sol.pivot_count / dt:.4g} pivots/s", "check": str(sol.objective_value)})
    if ex.get("search"):
        n = ex["search"]
        res, dt = _timed(lambda: pfsearch.max_product_free(n, budget=cfg.budget))
        rows.append({"task": "search", "param": n, "seconds": f"~{dt:.4f}", "rate": f"~{res.nodes_explored / dt:.4g} nodes/s", "check": str(res.density)})
    if not rows:
        raise UsageError("bench needs at least one of --sieve, --simplex, --search")
    return OK, rows


COMMANDS = {
    "search": cmd_search,
    "lp": cmd_lp,
    "certify": cmd_certify,
    "construct": cmd_construct,
    "sweep": cmd_sweep,
    "bench": cmd_bench,
}


# --- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("json", "csv", "text"), default="json")
    common.add_argument("--output", type=Path, help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=1)

    p = argparse.ArgumentParser(prog="pfdensity", description="Product-free set densities in Z/nZ.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("search", parents=[common], help="exact D(n) by branch and bound")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--n", type=_int)
    g.add_argument("--range", type=_range)
    s.add_argument("--budget", type=_budget, default=math.inf, help="node budget, e.g. 1e7")
    s.add_argument("--cap", type=int, default=pfsearch.SEARCH_CAP)

    s = sub.add_parser("lp", parents=[common], help="solve (P_n) and (D_n) exactly")
    s.add_argument("--n", type=_int, required=True)
    s.add_argument("--export", type=Path, help="write the primal model in LP text format")
    s.add_argument("--cap", type=int, default=lpcore.LP_VARIABLE_CAP, help="maximum LP variables")

    s = sub.add_parser("certify", parents=[common], help="build or check a mass-shifting certificate")
    s.add_argument("--n", type=_int)
    s.add_argument("--X", type=_int)
    s.add_argument("--k", type=int)
    s.add_argument("--N", type=_int)
    s.add_argument("--restrict", action="store_true", help="keep only level elements m with m^2 | N")
    s.add_argument("--emit-certificate", type=Path)
    s.add_argument("--check", type=Path, help="re-verify a certificate file")

    s = sub.add_parser("construct", parents=[common], help="interval family mod lcm(1..x)^2")
    s.add_argument("--x", type=int, required=True)
    s.add_argument("--interval", type=_pair, required=True, help="lo,hi")
    s.add_argument("--materialize", action="store_true")

    s = sub.add_parser("sweep", parents=[common], help="bound envelopes over a range of n")
    s.add_argument("--n", type=_range, required=True, help="a..b")
    s.add_argument("--budget", type=_budget, default=math.inf)

    s = sub.add_parser("bench", parents=[common], help="timings")
    s.add_argument("--sieve", type=_int)
    s.add_argument("--simplex", type=_int)
    s.add_argument("--search", type=_int)
    s.add_argument("--budget", type=_budget, default=math.inf)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(ns.subcommand, fmt=ns.fmt, output=ns.output, threads=ns.threads)
    if cfg.threads < 1:
        raise UsageError("--threads must be at least 1")
    cfg.budget = getattr(ns, "budget", math.inf)
    sc = ns.subcommand
    if sc == "search":
        cfg.n, cfg.range = ns.n, ns.range
        cfg.extra["cap"] = ns.cap
    elif sc == "lp":
        cfg.n = ns.n
        cfg.extra.update(export=ns.export, cap=ns.cap)
    elif sc == "certify":
        cfg.n, cfg.X, cfg.k, cfg.N = ns.n, ns.X, ns.k, ns.N
        cfg.extra.update(check=ns.check, emit=ns.emit_certificate, restrict=ns.restrict)
        given = [name for name in ("n", "X", "k", "N") if getattr(ns, name) is not None]
        if ns.check:
            if given or ns.emit_certificate:
                raise UsageError("--check takes no other parameters")
        elif ns.n is None:
            if ns.X is None or ns.N is None:
                raise UsageError("certify needs --n, or --X and --N (with optional --k)")
        if ns.restrict and ns.n is not None:
            raise UsageError("--restrict applies to --X/--N certificates only")
    elif sc == "construct":
        cfg.lo, cfg.hi = ns.interval
        cfg.extra.update(x=ns.x, materialize=ns.materialize)
    elif sc == "sweep":
        cfg.range = ns.n
    elif sc == "bench":
        cfg.extra.update(sieve=ns.sieve, simplex=ns.simplex, search=ns.search)
    return cfg


def run(cfg: RunConfig) -> tuple[int, str]:
    code, payload = COMMANDS[cfg.subcommand](cfg)
    return code, render(payload, cfg.fmt)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        code, text = run(cfg)
    except AmbiguousFloorError as e:
        print(f"precision: {e}", file=sys.stderr)
        return PRECISION
    except certificate.CertificateError as e:
        print(f"certificate: {e}", file=sys.stderr)
        return PRECONDITION if isinstance(e, certificate.DivisibilityError) else VERIFY_FAILED
    except (UsageError, lpcore.LpSizeError, arith.SieveBudgetError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return PRECONDITION
    if cfg.output:
        cfg.output.write_text(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
