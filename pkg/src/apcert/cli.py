"""apcert command line.

Every command builds one envelope::

    {"schema_version": 1, "command": [...], "groups": [...], "status": ..., "result": {...}}

and renders it as text, JSON or CSV.  The exit code is 0 exactly when the
status is PASS; errors exit with 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, _config
from .bounds import fraction_str, format_table, table1, theorem1_bound
from .groups import (
    AssociativityError,
    GroupError,
    GroupSpecError,
    IdentityError,
    InverseError,
    LatinSquareError,
    SizeLimitError,
    order_profile,
    parse_group_spec,
)

SCHEMA_VERSION = 1

_AXIOMS = {
    LatinSquareError: "closure/cancellation (Latin square)",
    IdentityError: "identity",
    InverseError: "inverses",
    AssociativityError: "associativity",
}


class CliError(Exception):
    def __init__(self, message: str, module: str, kind: str = "error"):
        super().__init__(message)
        self.module = module
        self.kind = kind


def _num(q, decimal: bool):
    if isinstance(q, float):
        return q
    return float(q) if decimal else fraction_str(q)


def _group(spec: str):
    try:
        return parse_group_spec(spec)
    except GroupSpecError as exc:
        raise CliError(str(exc), "group_core", "parse error") from exc
    except tuple(_AXIOMS) as exc:
        raise CliError(f"{exc} (violates the {_AXIOMS[type(exc)]} axiom)", "group_core", "validation error") from exc
    except SizeLimitError as exc:
        raise CliError(str(exc), "group_core", "size limit") from exc
    except GroupError as exc:
        raise CliError(str(exc), "group_core", "validation error") from exc
    except OSError as exc:
        raise CliError(str(exc), "group_core", "io error") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"malformed group file: {exc}", "group_core", "parse error") from exc


def _parse_range(text: str) -> range:
    try:
        a, b = text.split("..")
        return range(int(a), int(b) + 1)
    except ValueError:
        raise CliError(f"range must look like a..b, got {text!r}", "cli", "usage error") from None


# ---------------------------------------------------------------------------
# Commands: each returns (status, groups, result, text, csv_rows)
# ---------------------------------------------------------------------------


def cmd_group_info(args):
    G = _group(args.spec)
    prof = order_profile(G)
    result = {"order": G.n, "profile": prof.to_json(), "exponent": prof.exponent, "abelian": G.is_abelian()}
    text = [f"group {G.name}", f"order {G.n}", f"exponent {prof.exponent}"]
    text.append("profile " + ", ".join(f"{k}:{v}" for k, v in sorted(prof.counts.items())))
    rows = [{"group": G.name, "order_k": k, "count": v} for k, v in sorted(prof.counts.items())]
    return "PASS", [G.name], result, "\n".join(text), rows


def cmd_aps(args):
    from .aps import ap_table, write_aps_jsonl

    G = _group(args.spec)
    try:
        tab = ap_table(G, args.k, force=args.force)
    except SizeLimitError as exc:
        raise CliError(str(exc), "ap_engine", "size limit") from exc
    result = {"k": args.k, "count": len(tab)}
    text = f"{G.name}: {len(tab)} distinct {args.k}-term APs"
    rows = [{"group": G.name, "k": args.k, "count": len(tab)}]
    if args.action == "list":
        sets = tab.sets()
        if args.out:
            with open(args.out, "w") as fh:
                write_aps_jsonl(sets, fh)
            result["written"] = args.out
            text += f"\nwritten to {args.out}"
        else:
            result["aps"] = [s.to_json() for s in sets]
            text += "\n" + "\n".join(" ".join(map(str, s.elements)) for s in sets)
        rows = [{"group": G.name, "k": args.k, "elements": " ".join(map(str, s.elements))} for s in sets]
    return "PASS", [G.name], result, text, rows


def cmd_bound(args):
    if args.table:
        reports = table1()
    else:
        if not args.specs:
            raise CliError("bound needs group specs or --table", "cli", "usage error")
        reports = []
        for spec in args.specs:
            G = _group(spec)
            reports.append(theorem1_bound(G, name=G.name))
    result = {"reports": [r.to_json(args.decimal) for r in reports]}
    text = format_table(reports, args.decimal)
    notes = [f"{r.group}: {n}" for r in reports for n in r.notes]
    if not args.table:
        text += "\n" + "\n".join(f"{r.group}: bound ceiling {r.ceiling}" for r in reports)
    if notes:
        text += "\nnotes:\n" + "\n".join("  " + n for n in notes)
    rows = [
        {
            "group": r.group,
            "total_aps": _num(r.total_aps_theorem, args.decimal),
            "total_aps_proof": _num(r.total_aps_proof, args.decimal),
            "bound": _num(r.bound, args.decimal),
            "bound_ceiling": r.ceiling,
        }
        for r in reports
    ]
    return "PASS", [r.group for r in reports], result, text, rows


def cmd_certificate(args):
    from .certificate import RegimeError, check_regime, verify_certificate

    if args.k is None and args.range is None:
        raise CliError("certificate needs --k or --range", "cli", "usage error")
    ks = [args.k] if args.k is not None else list(_parse_range(args.range))
    entries, lines, rows = [], [], []
    failed = 0
    for k in ks:
        try:
            check_regime(k)
        except RegimeError:
            entries.append({"k": k, "status": "SKIPPED", "reason": "k must be odd, >= 5 and not divisible by 3"})
            if args.k is not None:
                lines.append(f"k={k}: SKIPPED (regime)")
            rows.append({"k": k, "status": "SKIPPED", "bound": ""})
            continue
        rep = verify_certificate(k)
        js = rep.to_json()
        js["bound"] = _num(rep.bound, args.decimal)
        entries.append(js)
        failed += not rep.passed
        lines.append(f"k={k}: {js['status']}, bound {js['bound']}")
        rows.append({"k": k, "status": js["status"], "bound": js["bound"]})
    checked = sum(e["status"] != "SKIPPED" for e in entries)
    skipped = len(entries) - checked
    if args.k is None:
        lines.append(f"{checked - failed}/{checked} eligible k PASS, {skipped} skipped")
    status = "FAIL" if failed else "PASS"
    if args.k is not None and checked == 0:
        # a lone out-of-regime k is not a PASS
        status = "SKIPPED"
    return status, [], {"results": entries, "checked": checked, "failed": failed, "skipped": skipped}, "\n".join(lines), rows


def _oracle_kw(args):
    return {"threads": args.threads, "cache": args.cache}


def cmd_oracle(args):
    from .oracle import exact_min

    G = _group(args.spec)
    try:
        res = exact_min(G, args.k, args.max_size, cap=args.cap, checkpoint=args.checkpoint, **_oracle_kw(args))
    except SizeLimitError as exc:
        raise CliError(str(exc), "oracle", "size limit") from exc
    text = [f"R({args.k},{G.name},2) = {res.exact_min}", f"{res.optimal_count} optimal colorings (identity fixed to +)"]
    text += ["  " + c for c in res.optimal_colorings]
    rows = [{"group": G.name, "k": args.k, "exact_min": res.exact_min, "coloring": c} for c in res.optimal_colorings]
    return "PASS", [G.name], res.to_json(), "\n".join(text), rows


def cmd_verify(args):
    from .oracle import verify_suite

    G = _group(args.spec)
    try:
        checks = verify_suite(G, args.max_size, **_oracle_kw(args))
    except SizeLimitError as exc:
        raise CliError(str(exc), "oracle", "size limit") from exc
    js = [c.to_json() for c in checks]
    lines = []
    for c in checks:
        line = f"{'PASS' if c.passed else 'FAIL'}: {c.name}"
        if "discrepancy" in c.detail:
            line += f"\n  note: {c.detail['discrepancy']}"
        lines.append(line)
    status = "PASS" if all(c.passed for c in checks) else "FAIL"
    rows = [{"group": G.name, "check": c.name, "status": "PASS" if c.passed else "FAIL"} for c in checks]
    return status, [G.name], {"checks": js}, "\n".join(lines), rows


def cmd_sdp(args):
    from .bounds import bound_from_lambda
    from .sdp.putinar import build_putinar_degree3, symmetric_bases
    from .sdp.sdpa import export_sdpa
    from .sdp.solver import SolverLimitError, solve_small
    from .sdp.validate import extract_certificate, validate_certificate

    G = _group(args.spec)
    sym = args.mode == "symmetric"
    try:
        problem = build_putinar_degree3(G, symmetric=sym)
    except SizeLimitError as exc:
        raise CliError(str(exc), "sdp", "size limit") from exc
    result = {"mode": args.mode, "problem": problem.summary()}
    lines = [f"{args.mode} degree-3 relaxation for {G.name}: {len(problem.blocks)} blocks, {problem.m} constraints"]
    if args.out:
        try:
            export_sdpa(problem, args.out, comments=[f"degree-3 relaxation of p_G, group {G.name}, mode {args.mode}"])
        except OSError as exc:
            raise CliError(str(exc), "sdp", "io error") from exc
        result["written"] = args.out
        lines.append(f"written to {args.out}")
    status = "PASS"
    rows = []
    if args.solve:
        target = problem
        bases = None
        if args.reduce and sym:
            from .symmetry import multiplication_table, reduce_sdp, symmetrize_problem

            bases = symmetric_bases(G)
            target = reduce_sdp(symmetrize_problem(problem, bases), bases, [multiplication_table(b) for b in bases])
        try:
            sol = solve_small(target, tol=args.tol, max_iters=args.max_iters, seed=args.seed)
        except SolverLimitError as exc:
            raise CliError(str(exc), "sdp", "size limit") from exc
        if bases is not None:
            from .symmetry import expand_reduced

            sol.X = expand_reduced(sol.X, bases)
        cert = extract_certificate(problem, sol)
        rep = validate_certificate(problem, cert)
        bound = bound_from_lambda(G, float(rep.rigorous_bound), _total_aps(G))
        result["solution"] = sol.to_json(include_blocks=args.dump_blocks)
        result["certificate"] = rep.to_json()
        result["lambda"] = sol.primal_objective
        result["bound"] = bound
        result["bound_ceiling"] = math.ceil(bound - 1e-9)
        lines.append(f"solver: {sol.status} after {sol.iterations} iterations")
        lines.append(f"lambda* = {sol.primal_objective:.9g} (dual {sol.dual_objective:.9g})")
        lines.append(f"certificate: {rep.status}, rigorous p_G >= {float(rep.rigorous_bound):.9g}")
        lines.append(f"bound on R(3,{G.name},2): {bound:.9g}")
        rows = [{"group": G.name, "mode": args.mode, "status": sol.status, "lambda": sol.primal_objective, "bound": bound}]
        if not sol.converged:
            status = "FAIL"
    return status, [G.name], result, "\n".join(lines), rows


def _total_aps(G):
    from .aps import ap_table

    return len(ap_table(G, 3))


# ---------------------------------------------------------------------------
# Parser and rendering
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--decimal", action="store_true", default=argparse.SUPPRESS, help="render rationals as floats")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--cache", default=argparse.SUPPRESS, help="JSON results cache for oracle runs")

    p = argparse.ArgumentParser(prog="apcert", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=f"apcert {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", parents=[common], help="group facts")
    gs = g.add_subparsers(dest="action", required=True)
    gi = gs.add_parser("info", parents=[common])
    gi.add_argument("spec")
    gi.set_defaults(func=cmd_group_info)

    a = sub.add_parser("aps", parents=[common], help="enumerate arithmetic progressions")
    as_ = a.add_subparsers(dest="action", required=True)
    for name in ("count", "list"):
        x = as_.add_parser(name, parents=[common])
        x.add_argument("spec")
        x.add_argument("--k", type=int, default=3)
        x.add_argument("--force", action="store_true", help="ignore the enumeration size limit")
        if name == "list":
            x.add_argument("--out", help="write JSON lines here")
        x.set_defaults(func=cmd_aps)

    b = sub.add_parser("bound", parents=[common], help="order-profile lower bound")
    b.add_argument("specs", nargs="*")
    b.add_argument("--table", action="store_true", help="S5..S8 table")
    b.set_defaults(func=cmd_bound)

    c = sub.add_parser("certificate", parents=[common], help="verify the per-order certificate identity")
    c.add_argument("--k", type=int)
    c.add_argument("--range", help="a..b")
    c.set_defaults(func=cmd_certificate)

    o = sub.add_parser("oracle", parents=[common], help="exhaustive minimum")
    o.add_argument("spec")
    o.add_argument("--k", type=int, default=3)
    o.add_argument("--max-size", type=int, default=_config.DEFAULT_ORACLE_MAX_SIZE)
    o.add_argument("--cap", type=int, default=16, help="optimal colorings to keep")
    o.add_argument("--checkpoint", help="directory for resumable shard results")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("verify", parents=[common], help="bound vs oracle harness")
    v.add_argument("spec")
    v.add_argument("--max-size", type=int, default=_config.DEFAULT_ORACLE_MAX_SIZE)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sdp", parents=[common], help="degree-3 relaxation")
    s.add_argument("spec")
    s.add_argument("--mode", choices=("full", "symmetric"), default="symmetric")
    s.add_argument("--out", help="SDPA sparse file to write")
    s.add_argument("--solve", action="store_true")
    s.add_argument("--reduce", action="store_true", help="solve the commutant-reduced problem (symmetric mode)")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--max-iters", type=int, default=20000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dump-blocks", action="store_true", help="include Gram blocks in JSON output")
    s.set_defaults(func=cmd_sdp)
    return p


_DEFAULTS = {"format": "text", "decimal": False, "threads": 1, "cache": None}


def _render_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    fields = list(rows[0])
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, val in _DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, val)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    envelope = {"schema_version": SCHEMA_VERSION, "command": ["apcert", *argv], "groups": []}
    try:
        status, groups, result, text, rows = args.func(args)
        envelope.update(status=status, groups=groups, result=result)
        code = 0 if status == "PASS" else 1
    except CliError as exc:
        envelope.update(status="ERROR", error={"module": exc.module, "kind": exc.kind, "message": str(exc)})
        text = f"{exc.kind} ({exc.module}): {exc}"
        rows = [{"status": "ERROR", "module": exc.module, "message": str(exc)}]
        code = 2
    if args.format == "json":
        out = json.dumps(envelope, default=_jsonable, indent=2)
    elif args.format == "csv":
        out = _render_csv(rows)
    else:
        out = text if envelope["status"] in ("PASS", "ERROR") else f"{text}\n{envelope['status']}"
    stream = sys.stderr if code == 2 and args.format == "text" else sys.stdout
    if out:
        print(out, file=stream)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
