"""Command-line front end.

Exit codes: 0 success, 1 not found within budget (``find``) or failed audits
(``audit`` without ``--expect-failures``), 2 usage or parse error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import audits as audits_mod
from .experiments import (
    ConfigError,
    ExperimentConfig,
    maxima_csv,
    run_containment,
    run_exact_maxima,
    run_threshold_sweep,
)
from .graph import format_graph, read_graph, read_tree, sample_gnp, sample_planted
from .moments import MomentParams, chebyshev_bound, expected_count, h_tilde, log_q, threshold_size
from .overlap import overlap_table
from .rng import Seed
from .search import CapExceeded, InvariantViolation, SearchBudget, count_ordered_embeddings, search_induced_embedding

EXIT_OK, EXIT_NOT_FOUND, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _float_or_none(x: float):
    return x if math.isfinite(x) else None


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` comments; keys use dashes or underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for i, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{i}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


# defaults applied after the config file, so explicit flags > config file > defaults
DEFAULTS = {
    "seed": 0, "threads": 1, "p_law": "fixed", "delta": 3, "tree_family": "random", "trials": 100,
    "max_steps": 1_000_000, "max_restarts": 10, "families": "tree,path,matching", "form": "lnform",
}


def _merge(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    types = {a.dest: a.type for a in parser._actions}
    flags = {a.dest for a in parser._actions if a.nargs == 0}
    for key, value in conf.items():
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) in (None, False):
            if key in flags:
                value = value.lower() in ("1", "true", "yes", "on")
            elif types.get(key):
                try:
                    value = types[key](value)
                except ValueError:
                    raise UsageError(f"config key {key}: bad value {value!r}") from None
            setattr(args, key, value)
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    return args


# --------------------------------------------------------------------------
# subcommands


def cmd_sample(args) -> int:
    seed = Seed(args.seed)
    if args.tree:
        tree = read_tree(args.tree)
        anchor = tuple(int(x) for x in args.anchor.split(",")) if args.anchor else tuple(range(tree.b))
        graph = sample_planted(tree, anchor, args.n, args.p, seed)
    else:
        graph = sample_gnp(args.n, args.p, seed)
    _write(format_graph(graph), args.out)
    return EXIT_OK


def cmd_find(args) -> int:
    graph, tree = read_graph(args.graph), read_tree(args.tree)
    res = search_induced_embedding(graph, tree, SearchBudget(args.max_steps, args.max_restarts, Seed(args.seed)))
    _write(_json({
        "found": res.found,
        "embedding": list(res.embedding) if res.found else None,
        "steps": res.steps,
        "restarts": res.restarts,
        "search_space_exhausted": res.exhausted,
        "status": "found" if res.found else ("absent" if res.exhausted else "not found within budget"),
    }), args.out)
    return EXIT_OK if res.found else EXIT_NOT_FOUND


def cmd_count(args) -> int:
    tree = read_tree(args.tree)
    if args.overlap_table:
        n = args.n if args.n is not None else (read_graph(args.graph).n if args.graph else None)
        if n is None:
            raise UsageError("--overlap-table needs --n or --graph")
        table = overlap_table(tree, None, n, force=args.force)
        lines = ["ell,k,count"]
        lines += [f"{ell},{k},{s}" for ell, k, s in table.rows()]
        lines += [f"incompatible,,{table.incompatible}", f"independent,,{table.independent}",
                  f"total,,{table.total}"]
        _write("\n".join(lines) + "\n", args.overlap_table)
        if not args.graph:
            return EXIT_OK
    if not args.graph:
        raise UsageError("count needs --graph (or --overlap-table with --n)")
    graph = read_graph(args.graph)
    _write(_json({"n": graph.n, "b": tree.b, "ordered_embeddings": count_ordered_embeddings(graph, tree, force=args.force)}),
           args.out)
    return EXIT_OK


def cmd_maxima(args) -> int:
    rows = run_exact_maxima(args.n, args.p, args.trials, args.families.split(","), args.seed,
                            threads=args.threads, force=args.force)
    _write(maxima_csv(rows), args.out)
    return EXIT_OK


def cmd_moments(args) -> int:
    b = args.b if args.b is not None else threshold_size(args.n, args.p, args.form)
    params = MomentParams(args.n, args.p, args.delta, b)
    out = {"n": params.n, "p": params.p, "delta": params.delta, "b": params.b, "c": params.c,
           "q": params.q, "d": params.d, "regime_notes": list(params.notes)}
    try:
        out["h"] = params.h
        out["threshold_logq"] = threshold_size(params.n, params.p, "logq")
        out["threshold_lnform"] = threshold_size(params.n, params.p, "lnform")
    except ValueError as exc:
        out["h"] = None
        out["threshold_error"] = str(exc)
    out["two_log_q_np"] = 2 * log_q(params.c, params.p) if params.c > 0 else None
    ex = expected_count(params)
    out["log_expected_count"] = _float_or_none(ex.log)
    out["expected_count"] = _float_or_none(float(ex)) if ex.log < 700 else None
    if params.b >= 2:
        ht = h_tilde(params, "bound")
        cb = chebyshev_bound(params, "bound")
        out["log_h_tilde_bound"] = _float_or_none(ht.log)
        out["chebyshev_bound"] = cb.value
        out["chebyshev_informative"] = cb.informative
    _write(_json(out), args.out)
    return EXIT_OK


def _config_from_args(args) -> ExperimentConfig:
    tree = read_tree(args.tree) if args.tree else None
    family = "file" if tree is not None else args.tree_family
    return ExperimentConfig(
        n=args.n, p=args.p, p_law=args.p_law, delta=args.delta, tree_family=family, tree=tree, b=args.b,
        trials=args.trials, max_steps=args.max_steps, max_restarts=args.max_restarts, seed=args.seed,
        planted=bool(args.planted), threads=args.threads, record_timing=bool(args.record_timing),
    )


def cmd_sweep(args) -> int:
    if args.n is None:
        raise UsageError("sweep needs --n (flag or config)")
    config = _config_from_args(args)
    if args.b_min is not None or args.b_max is not None:
        if args.b_min is None or args.b_max is None:
            raise UsageError("--b-min and --b-max go together")
        result = run_threshold_sweep(config, range(args.b_min, args.b_max + 1, args.b_step or 1))
    else:
        result = run_containment(config)
    _write(result.to_csv(), args.out)
    flagged = result.monotonicity_flags()
    if flagged:
        print(f"note: success rate rises beyond noise at b = {flagged}", file=sys.stderr)
    return EXIT_OK


def cmd_audit(args) -> int:
    text = Path(args.grid).read_text(encoding="utf-8") if args.grid else audits_mod.default_grid_text()
    points = audits_mod.parse_grid(text)
    reports = audits_mod.run_grid(points)
    outdir = Path(args.out_dir) if args.out_dir else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    for name, rep in reports.items():
        if outdir:
            (outdir / f"{name}.txt").write_text(rep.to_text(), encoding="utf-8")
            (outdir / f"{name}.csv").write_text(rep.to_csv(), encoding="utf-8")
    summary = " ".join(f"{name}={'pass' if rep.passed else 'fail'}({len(rep.failures())}/{len(rep.records)} failed)"
                       for name, rep in reports.items())
    all_ok = all(rep.passed for rep in reports.values())
    line = f"summary: {summary} overall={'pass' if all_ok else 'fail'}\n"
    if outdir:
        (outdir / "summary.txt").write_text(line, encoding="utf-8")
    _write(line, args.out)
    return EXIT_OK if all_ok or args.expect_failures else EXIT_NOT_FOUND


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inducedtrees", description="Induced trees in random graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, help="master seed (default 0)")
        p.add_argument("--threads", type=int, help="worker processes (default 1)")
        p.add_argument("--config", help="key=value file; explicit flags win")
        p.add_argument("--out", help="output file (default stdout)")
        return p

    p = common(sub.add_parser("sample", help="sample G(n,p), optionally with a planted tree"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--tree", help="tree file to plant")
    p.add_argument("--anchor", help="comma-separated 0-based anchor (default 0..b-1)")
    p.set_defaults(func=cmd_sample)

    p = common(sub.add_parser("find", help="search one graph for an induced copy of a tree"))
    p.add_argument("--graph", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--max-restarts", type=int)
    p.set_defaults(func=cmd_find)

    p = common(sub.add_parser("count", help="exact count of ordered induced embeddings"))
    p.add_argument("--graph")
    p.add_argument("--tree", required=True)
    p.add_argument("--n", type=int, help="host size for --overlap-table")
    p.add_argument("--overlap-table", help="write the (ell, k) overlap counts as CSV")
    p.add_argument("--force", action="store_true", help="lift the exact-enumeration cap")
    p.set_defaults(func=cmd_count)

    p = common(sub.add_parser("maxima", help="exact maximum induced tree/path/matching at tiny n"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--families", help="comma list of tree,path,matching")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_maxima)

    p = common(sub.add_parser("moments", help="evaluate E[X], H-tilde and the Chebyshev bound"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--delta", type=int)
    p.add_argument("--b", type=int, help="tree size (default threshold_size lnform)")
    p.add_argument("--form", choices=["logq", "lnform"])
    p.set_defaults(func=cmd_moments)

    p = common(sub.add_parser("sweep", help="containment experiment at one b or over a b range"))
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--p-law", choices=["fixed", "sqrt-law"])
    p.add_argument("--delta", type=int)
    p.add_argument("--tree-family", choices=["random", "path", "full", "caterpillar"])
    p.add_argument("--tree", help="tree file (overrides --tree-family and --b)")
    p.add_argument("--b", type=int)
    p.add_argument("--b-min", type=int)
    p.add_argument("--b-max", type=int)
    p.add_argument("--b-step", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--max-restarts", type=int)
    p.add_argument("--planted", action="store_true", help="plant the tree in every sample")
    p.add_argument("--record-timing", action="store_true", help="fill wall_time_ms (output no longer reproducible)")
    p.set_defaults(func=cmd_sweep)

    p = common(sub.add_parser("audit", help="run the inequality audits over a grid"))
    p.add_argument("--grid", help="grid file of 'n c delta' rows (default: shipped grid)")
    p.add_argument("--out-dir", help="directory for per-audit .txt and .csv reports")
    p.add_argument("--expect-failures", action="store_true", help="exit 0 even when records fail")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _merge(args, sub)
        return args.func(args)
    except InvariantViolation as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except audits_mod.GridError as exc:
        print(f"error: grid {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ConfigError, CapExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
