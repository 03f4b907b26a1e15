"""Command-line front end.

Every subcommand is a thin wrapper over library calls.  Exit codes: 0 on
success, 1 when a check fails or a bound is violated, 2 on usage errors
(bad arguments, unknown graphs, missing or malformed files), 3 when a
search budget is exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .blob import BlobError, BlobMove, Inconclusive, blob_cost, blob_price_exact, parse_config, run_blob
from .dag import GraphError, LayeredDag, graph_from_spec
from .formula import FormulaError, formula_from_dimacs, pebbling_contradiction, strip_targets, to_dimacs
from .hiding import (HidingError, SearchBudget, hidden_vertices, measure, measure_profile, potential,
                     spreading_check)
from .induced import EntailmentBudget, TranslationError, translate, verify_bounds
from .pebbling import BudgetExceeded, BwConfig, PebblingError, black_strategy, exact_price
from .resolution import (ResolutionError, build_degree1, build_from_pebbling, build_linear, parse_trace,
                         replay)

MAX_DEGREE = 4


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text)


def _graph(args) -> LayeredDag:
    spec = getattr(args, "graph", None) or getattr(args, "graph_pos", None)
    if not spec:
        raise UsageError("a graph is required (pyramid:<h>, tree:<h> or a graph file)")
    try:
        return graph_from_spec(spec)
    except (GraphError, OSError, ValueError) as exc:
        raise UsageError(f"bad graph {spec!r}: {exc}") from None


def _degree(args) -> int:
    d = args.degree
    if not 1 <= d <= MAX_DEGREE:
        raise UsageError(f"degree must be between 1 and {MAX_DEGREE}")
    return d


def _names(dag: LayeredDag, text: str | None) -> list[int]:
    if not text:
        return []
    return [dag.vertex(t.strip()) for t in text.split(",") if t.strip()]


def _pebbling_formula(args, dag: LayeredDag, d: int, targets: bool):
    if getattr(args, "cnf", None):
        f = formula_from_dimacs(_read(args.cnf), dag)
        if getattr(f, "dag", None) is None:
            raise UsageError("the CNF does not match the given graph")
        return f
    f = pebbling_contradiction(dag, d)
    return f if targets else strip_targets(f)


# -- subcommands -----------------------------------------------------------------

def cmd_gen(args) -> dict:
    dag = _graph(args)
    d = _degree(args)
    f = pebbling_contradiction(dag, d)
    if args.no_targets:
        f = strip_targets(f)
    _write(args.out, to_dimacs(f))
    return {"results": {"vars": f.nvars, "clauses": len(f.clauses), "groups": f.group_counts()},
            "verdict": "pass"}


def cmd_check(args) -> dict:
    if args.trace:
        if not args.cnf:
            raise UsageError("check --trace needs --cnf")
        if args.cnf == "-" and args.trace == "-":
            raise UsageError("only one of --cnf and --trace can read stdin")
        f = formula_from_dimacs(_read(args.cnf))
        t = parse_trace(_read(args.trace))
        try:
            m = replay(f, t)
        except ResolutionError as exc:
            return {"results": {"error": str(exc), "step": getattr(exc, "step", None)}, "verdict": "fail"}
        return {"results": m.as_dict(), "verdict": "pass"}
    dag = _graph(args)
    if args.pebbling:
        from .pebbling import is_complete, parse_pebbling, pebbling_cost
        p = parse_pebbling(_read(args.pebbling), dag)
        try:
            cost = pebbling_cost(dag, p)
        except PebblingError as exc:
            return {"results": {"error": str(exc), "step": exc.step}, "verdict": "fail"}
        done = is_complete(dag, p)
        return {"results": {"cost": cost, "complete": done}, "verdict": "pass" if done else "fail"}
    if args.blob:
        data = json.loads(_read(args.blob))
        moves = [BlobMove.from_json(m) for m in (data["moves"] if isinstance(data, dict) else data)]
        try:
            seq = run_blob(dag, moves)
        except BlobError as exc:
            return {"results": {"error": str(exc), "step": exc.step}, "verdict": "fail"}
        return {"results": {"moves": len(moves), "cost": max(blob_cost(c, dag) for c in seq),
                            "final": sorted(s.show(dag) for s in seq[-1])}, "verdict": "pass"}
    raise UsageError("check needs --trace, --pebbling or --blob")


def cmd_price(args) -> dict:
    dag = _graph(args)
    if args.mode == "blob":
        r = blob_price_exact(dag, max_cost=args.budget, max_states=args.max_states)
        return {"results": {"price": r.price, "states_explored": r.states_explored,
                            "witness": [m.as_json() for m in r.witness]}, "verdict": "pass"}
    r = exact_price(dag, args.mode, args.budget, args.max_states)
    res = r.as_dict(dag)
    res["witness"] = [f"{op} {dag.name(v)}" for op, v in r.witness]
    return {"results": res, "verdict": "pass"}


def cmd_build(args) -> dict:
    dag = _graph(args)
    targets = not args.no_targets
    if args.strategy == "degree1":
        if args.degree not in (None, 1):
            raise UsageError("the degree1 strategy only exists for degree 1")
        d = 1
        t = build_degree1(dag, targets)
    else:
        d = _degree(args)
        if args.strategy == "linear":
            t = build_linear(dag, d, targets)
        else:
            t = build_from_pebbling(dag, d, black_strategy(dag), targets)
    t.cnf_name = args.cnf_name
    m = replay(t.formula, t)
    _write(args.out, t.to_text())
    return {"results": m.as_dict() | {"degree": d}, "verdict": "pass"}


def cmd_translate(args) -> dict:
    dag = _graph(args)
    d = _degree(args)
    f = _pebbling_formula(args, dag, d, targets=False)
    t = parse_trace(_read(args.trace))
    tr = translate(f, t)
    doc = {"graph": args.graph or args.graph_pos, "degree": d,
           "moves": [m.as_json() for m in tr.moves], "boundaries": tr.marks}
    _write(args.out, json.dumps(doc, indent=1) + "\n")
    return {"results": {"moves": len(tr.moves), "max_cost": tr.max_cost,
                        "fallback_steps": tr.fallback_steps}, "verdict": "pass"}


def cmd_potential(args) -> dict:
    dag = _graph(args)
    res: dict = {}
    if args.set is not None:
        U = _names(dag, args.set)
        res["measure"] = measure(dag, U)
        res["profile"] = measure_profile(dag, U)
        res["hidden"] = dag.label(hidden_vertices(dag, U))
    if args.blob is not None:
        target = parse_config(dag, args.blob)
    elif args.black is not None or args.white is not None:
        target = BwConfig(frozenset(_names(dag, args.black)), frozenset(_names(dag, args.white)))
    else:
        target = None
    if target is not None:
        p = potential(dag, target)
        res["potential"] = p.potential
        res["witness"] = sorted(p.witness)
        res["witness_names"] = dag.label(p.witness)
    if not res:
        raise UsageError("potential needs --set, --blob, or --black/--white")
    return {"results": res, "verdict": "pass"}


def cmd_spreading(args) -> dict:
    dag = _graph(args)
    r = spreading_check(dag, max_vertices=args.max_vertices, jobs=args.jobs)
    return {"results": {"spreading": r.as_dict()}, "verdict": r.verdict}


def cmd_verify_bounds(args) -> dict:
    dag = _graph(args)
    d = _degree(args)
    f = _pebbling_formula(args, dag, d, targets=False)
    t = parse_trace(_read(args.trace))
    rep = verify_bounds(f, t)
    return {"results": rep.as_dict(), "verdict": "pass" if rep.ok else "fail"}


COMMANDS = {
    "gen": cmd_gen, "check": cmd_check, "price": cmd_price, "build": cmd_build,
    "translate": cmd_translate, "potential": cmd_potential, "spreading": cmd_spreading,
    "verify-bounds": cmd_verify_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for searches that support it")
    common.add_argument("--seed", type=int, default=None, help="only used by sampled checks")
    common.add_argument("--report", default=None, help="where to write the report (default stdout, "
                        "or stderr when the artifact goes to stdout)")

    p = argparse.ArgumentParser(prog="pebres", description="Pebbling formulas, resolution traces and pebble games.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def graph_args(sp, required=True):
        sp.add_argument("graph_pos", nargs="?", metavar="GRAPH")
        sp.add_argument("--graph", default=None)

    g = sub.add_parser("gen", parents=[common], help="write a pebbling contradiction in DIMACS")
    graph_args(g)
    g.add_argument("--degree", "-d", type=int, default=1)
    g.add_argument("--no-targets", action="store_true", help="drop the sink axioms")
    g.add_argument("--out", "-o", default="-")

    c = sub.add_parser("check", parents=[common], help="replay a trace or validate a pebbling")
    graph_args(c)
    c.add_argument("--cnf")
    c.add_argument("--trace")
    c.add_argument("--pebbling", help="black/black-white pebbling, one move per line")
    c.add_argument("--blob", help="blob pebbling as JSON")

    pr = sub.add_parser("price", parents=[common], help="exact pebbling price by exhaustive search")
    graph_args(pr)
    pr.add_argument("--mode", choices=("black", "bw", "blob"), default="black")
    pr.add_argument("--budget", type=int, default=None, help="largest pebble count (or blob cost) to try")
    pr.add_argument("--max-states", type=int, default=None)

    b = sub.add_parser("build", parents=[common], help="emit a resolution refutation")
    graph_args(b)
    b.add_argument("--degree", "-d", type=int, default=None)
    b.add_argument("--strategy", choices=("linear", "pebbling", "degree1"), default="linear")
    b.add_argument("--no-targets", action="store_true", help="derive All+(z) from the formula without sink axioms")
    b.add_argument("--cnf-name", default="-")
    b.add_argument("--out", "-o", default="-")

    t = sub.add_parser("translate", parents=[common], help="turn a derivation of All+(z) into a blob pebbling")
    graph_args(t)
    t.add_argument("--degree", "-d", type=int, default=2)
    t.add_argument("--cnf")
    t.add_argument("--trace", required=True)
    t.add_argument("--out", "-o", default="-")

    po = sub.add_parser("potential", parents=[common], help="measures and potentials")
    graph_args(po)
    po.add_argument("--set", help="comma-separated vertices; reports measure and hidden set")
    po.add_argument("--black")
    po.add_argument("--white")
    po.add_argument("--blob", help="blob configuration like '[z]<>; [y1]<x1,x2>'")

    s = sub.add_parser("spreading", parents=[common], help="exhaustive spreading check")
    graph_args(s)
    s.add_argument("--max-vertices", type=int, default=16)

    v = sub.add_parser("verify-bounds", parents=[common], help="cost and space bounds of induced configurations")
    graph_args(v)
    v.add_argument("--degree", "-d", type=int, default=2)
    v.add_argument("--cnf")
    v.add_argument("--trace", required=True)
    return p


def _text(report: dict) -> str:
    lines = [f"{report['command']}: {report['verdict']}"]
    if "error" in report:
        lines.append(f"  error: {report['error']}")

    def walk(prefix: str, obj) -> None:
        if isinstance(obj, dict):
            for k, val in obj.items():
                walk(f"{prefix}{k}.", val)
        else:
            if isinstance(obj, list) and len(obj) > 12:
                obj = f"[{len(obj)} items]"
            lines.append(f"  {prefix[:-1]}: {obj}")

    walk("", report.get("results", {}))
    return "\n".join(lines) + "\n"


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), {}
    start = time.perf_counter()
    report = {"command": args.command, "argv": list(argv if argv is not None else sys.argv[1:])}
    code = 0
    try:
        body = COMMANDS[args.command](args)
        report.update(body)
        code = 0 if body["verdict"] in ("pass", "partial") else 1
    except (UsageError, GraphError, FormulaError, KeyError, ValueError, json.JSONDecodeError) as exc:
        report.update(verdict="error", error=str(exc).strip("'\""))
        code = 2
    except (BudgetExceeded, SearchBudget, EntailmentBudget, Inconclusive) as exc:
        report.update(verdict="budget exceeded", error=str(exc))
        code = 3
    except (TranslationError, HidingError, BlobError, PebblingError, ResolutionError) as exc:
        report.update(verdict="fail", error=str(exc))
        code = 1
    report["wall_clock"] = round(time.perf_counter() - start, 3)
    text = json.dumps(report, indent=1, default=_jsonable) + "\n" if args.format == "json" else _text(report)
    artifact_on_stdout = getattr(args, "out", None) == "-" and code == 0
    if args.report:
        _write(args.report, text)
    elif artifact_on_stdout:
        sys.stderr.write(text)
    else:
        sys.stdout.write(text)
    return code, report


def _jsonable(obj):
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(type(obj).__name__)


def main(argv: list[str] | None = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
