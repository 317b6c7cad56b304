"""Command line: ``odt fit | verify | census | bench``.

Exit codes: 0 success, 1 usage or parse error, 2 infeasible constraints,
3 contract violation (including oracle mismatches found by ``verify``).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from math import comb
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analysis import (census_depth_trees, census_size_trees, complexity_report, depth_lb,
                       format_table, format_tsv, quant_bnb_probe)
from .core import (OBJECTIVES, BudgetExceeded, ContractError, InfeasibleError, ODTError,
                   ParseError, SchemaError, evaluate, load_dataset)
from .export import tree_to_dot, tree_to_json
from .geometry import DegenerateCombinationError, general_position_check, monomials
from .rules import ancestry_matrix, gen_splits_axis, gen_splits_mixed, gen_splits_surface, make_rulegen
from .solvers import SearchConfig, _inject_fault, min_e, odt_depth, odt_size
from .trees import gen_dts_kperms, gen_dts_rec, gen_dts_vec

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_CONTRACT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _degrees(args) -> tuple:
    if getattr(args, "mixed", None):
        try:
            return tuple(int(v) for v in args.mixed.split(","))
        except ValueError:
            raise SchemaError(f"--mixed expects comma-separated integers, got {args.mixed!r}") from None
    if getattr(args, "degree", None) is not None:
        return (args.degree,)
    return (0,)


def _size_rules(ds, Ms: tuple, strict: bool, stats: dict) -> list:
    if Ms == (0,):
        return gen_splits_axis(ds, dedup=False)
    if len(Ms) == 1:
        return list(gen_splits_surface(ds, Ms[0], strict=strict, stats=stats))
    return list(gen_splits_mixed(ds, Ms, strict=strict, stats=stats))


def _add_rule_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--axis", action="store_true", help="axis-parallel threshold rules (default)")
    g.add_argument("--degree", type=int, metavar="M", help="degree-M hypersurface rules")
    g.add_argument("--mixed", metavar="LIST", help="comma-separated ascending degrees, e.g. 0,1")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("data", help="CSV file with a header row")
    p.add_argument("--label-column", default=None, help="label column name or index (default: last)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="odt", description="Optimal decision trees over proper splitting rules.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fit = sub.add_parser("fit", help="solve for an optimal tree and export it")
    _add_data_flags(fit)
    mode = fit.add_mutually_exclusive_group(required=True)
    mode.add_argument("--size", type=int, metavar="K", help="exactly K splitting rules")
    mode.add_argument("--depth", type=int, metavar="D", help="depth at most D")
    _add_rule_flags(fit)
    fit.add_argument("--min-leaf", type=int, default=0, metavar="N")
    fit.add_argument("--max-depth", type=int, default=None, help="depth cap for --size search")
    fit.add_argument("--max-size", type=int, default=None, help="rule cap for --depth search")
    fit.add_argument("--thin", choices=["off", "gub", "similarity", "kmeans"], default="off")
    fit.add_argument("--objective", choices=sorted(OBJECTIVES), default="zeroone")
    fit.add_argument("--workers", type=int, default=1)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--strict-geometry", action="store_true",
                     help="fail on degenerate point combinations instead of skipping them")
    fit.add_argument("--memo", action="store_true", help="cache solved subproblems and report hit rate")
    fit.add_argument("--out", default=".", help="output directory (default: current)")

    ver = sub.add_parser("verify", help="cross-check solvers against enumeration on random instances")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--instances", type=int, default=30)
    ver.add_argument("--max-n", type=int, default=8)
    ver.add_argument("--max-k", type=int, default=3)
    ver.add_argument("--max-depth", type=int, default=2)
    ver.add_argument("--out", default=".", help="where to write a repro CSV on mismatch")
    ver.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    cen = sub.add_parser("census", help="count search-space sizes exactly")
    _add_data_flags(cen)
    cmode = cen.add_mutually_exclusive_group(required=True)
    cmode.add_argument("--size", type=int, metavar="K")
    cmode.add_argument("--depth", type=int, metavar="D")
    _add_rule_flags(cen)
    cen.add_argument("--budget", type=int, default=10**7)
    cen.add_argument("--external-count", type=int, default=None,
                     help="a count reported elsewhere, checked against the binomial floor")
    cen.add_argument("--tsv", default=None, help="write the report as TSV here")

    ben = sub.add_parser("bench", help="time generators and solvers")
    _add_data_flags(ben)
    ben.add_argument("--size", type=int, default=2, metavar="K")
    _add_rule_flags(ben)
    ben.add_argument("--repeat", type=int, default=1)
    ben.add_argument("--tsv", default=None)
    return parser


# ------------------------------------------------------------------- commands


def cmd_fit(args) -> int:
    task = "regression" if args.objective == "l2" else "classification"
    ds = load_dataset(args.data, args.label_column, task)
    obj = OBJECTIVES[args.objective]
    Ms = _degrees(args)
    geo_stats: dict = {"degenerate": 0}
    cfg = SearchConfig(K=args.size, depth=args.depth, min_leaf=args.min_leaf,
                       max_depth=args.max_depth, max_size=args.max_size, objective=args.objective,
                       thinning=args.thin, strict=args.strict_geometry, workers=args.workers,
                       memo=args.memo)
    t0 = time.perf_counter()
    census = []
    if args.size is not None:
        rules = _size_rules(ds, Ms, args.strict_geometry, geo_stats)
        census.append(f"rules={len(rules)} combinations=C({len(rules)},{args.size})="
                      f"{comb(len(rules), args.size)}")
        if len(rules) < args.size:
            raise InfeasibleError(f"only {len(rules)} rules available for K={args.size}")
        res = odt_size(args.size, rules, ancestry_matrix(rules), ds, obj, cfg)
        solver = "size-dp"
    else:
        rg = make_rulegen(ds, Ms, args.strict_geometry, geo_stats)
        census.append(f"root_rules={len(rg(ds.full))}")
        res = odt_depth(args.depth, None, ds, rg, obj, cfg)
        solver = "depth-dp"
    wall = time.perf_counter() - t0
    if any(m > 0 for m in Ms):
        gp = general_position_check(ds, monomials(ds.d, max(Ms)), rng=np.random.default_rng(args.seed))
        census.append(f"general_position={'yes' if gp else 'no'}")
    census.append(f"degenerate_skipped={geo_stats.get('degenerate', 0)}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / "tree.json", "dot": out / "tree.dot", "manifest": out / "manifest.json"}
    paths["json"].write_text(tree_to_json(res.tree, ds))
    paths["dot"].write_text(tree_to_dot(res.tree, ds))
    manifest = {
        "dataset": {"path": str(args.data), "sha256": ds.digest, "n": ds.n, "d": ds.d},
        "config": {k: v for k, v in cfg.__dict__.items()},
        "rules": {"degrees": list(Ms)},
        "seed": args.seed,
        "solver": solver,
        "objective": res.cost,
        "wall_seconds": round(wall, 6),
        "stats": res.stats,
        "outputs": {k: str(v) for k, v in paths.items() if k != "manifest"},
        "census": census,
    }
    paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"objective: {res.cost}")
    print(f"time: {wall:.3f}s")
    if args.memo:
        hits, misses = res.stats.get("memo_hits", 0), res.stats.get("memo_misses", 0)
        rate = hits / (hits + misses) if hits + misses else 0.0
        print(f"memo: hits={hits} misses={misses} hit_rate={rate:.4f}")
    print(f"wrote {paths['json']}, {paths['dot']}, {paths['manifest']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import dump_repro, run_verification

    if args.inject_fault:
        _inject_fault(True)
    try:
        lines = run_verification(args.seed, args.instances, args.max_n, args.max_k, args.max_depth)
    finally:
        _inject_fault(False)
    for ln in lines:
        print(ln.render())
    bad = [ln for ln in lines if not ln.ok]
    print(f"checked {len(lines)} instances, {len(bad)} mismatches")
    if bad:
        worst = min(bad, key=lambda ln: (ln.n, ln.index))
        path = dump_repro(worst, Path(args.out) / f"repro_seed{args.seed}_instance{worst.index}.csv")
        print(f"repro: {path} ({worst.kind}, param={worst.param}, min_leaf={worst.min_leaf})")
        return EXIT_CONTRACT
    return EXIT_OK


def cmd_census(args) -> int:
    ds = load_dataset(args.data, args.label_column)
    Ms = _degrees(args)
    rows = []
    flagged = False
    if args.size is not None:
        rules = _size_rules(ds, Ms, False, {})
        try:
            count = census_size_trees(rules, None, args.size, args.budget)
        except BudgetExceeded:
            count, flagged = "budget-exceeded", True
        rows.append(("census_size", args.size, count))
        floor = depth_lb(ds, args.size)
        verdict = "n/a" if flagged else ("ok" if count >= floor else "BELOW")
        rows.append(("depth_lb", args.size, floor))
        rows.append(("census_size>=depth_lb", args.size, verdict))
    else:
        rg = make_rulegen(ds, Ms)
        try:
            count = census_depth_trees(ds, args.depth, rg, args.budget)
        except BudgetExceeded:
            count, flagged = "budget-exceeded", True
        floor = depth_lb(ds, args.depth)
        rows.append(("census_depth", args.depth, count))
        rows.append(("depth_lb", args.depth, floor))
        rows.append(("census_depth>=depth_lb", args.depth,
                     "n/a" if flagged else ("ok" if count >= floor else "BELOW")))
    if args.external_count is not None:
        d = args.depth if args.depth is not None else args.size
        ok, line = quant_bnb_probe(args.external_count, ds, d)
        rows.append(("external_probe", d, line))
    mode = "axis" if Ms == (0,) else "surface"
    for name, formula, value in complexity_report(ds, mode, K=args.size, M=max(Ms) or 1, budget=0):
        if name in ("combinations_bound", "combinations", "cover_count", "rules"):
            rows.append((name, formula, value))
    header = ("quantity", "parameter", "value")
    text = format_tsv(rows, header)
    print(format_table(rows, header), end="")
    if flagged:
        print("note: census stopped at the step budget; report is partial")
    if args.tsv:
        Path(args.tsv).write_text(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    ds = load_dataset(args.data, args.label_column)
    Ms = _degrees(args)
    rules = _size_rules(ds, Ms, False, {})
    K = args.size
    A = ancestry_matrix(rules)
    from .combgen import kcombs

    def gen_min(kind):
        def run():
            def stream():
                for c in kcombs(K, len(rules)):
                    if kind == "rec":
                        yield from gen_dts_rec(ds.full, c, A)
                    elif kind == "vec":
                        yield from gen_dts_vec(ds.full, c, A)
                    else:
                        yield from gen_dts_kperms(c, A, ds.full)
            return evaluate(min_e(stream(), ds), ds)
        return run

    def dp(thin):
        return lambda: odt_size(K, rules, A, ds, cfg=SearchConfig(K=K, thinning=thin)).cost

    plan = [("gen-rec", "off", gen_min("rec")), ("gen-vec", "off", gen_min("vec")),
            ("gen-kperms", "off", gen_min("kperms")), ("size-dp", "off", dp("off")),
            ("size-dp", "gub", dp("gub"))]
    rows = []
    for name, thin, fn in plan:
        best = float("inf")
        for _ in range(max(1, args.repeat)):
            t0 = time.perf_counter()
            cost = fn()
            best = min(best, time.perf_counter() - t0)
        rows.append((name, thin, f"{best:.6f}", cost))
    header = ("solver", "thinning", "seconds", "objective")
    print(format_tsv(rows, header), end="")
    if args.tsv:
        Path(args.tsv).write_text(format_tsv(rows, header))
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "verify": cmd_verify, "census": cmd_census, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (ParseError, SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ContractError, DegenerateCombinationError) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except ODTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
