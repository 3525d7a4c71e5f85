"""Command line: ``python3 -m ssg_design {solve,gen,bench,export-milp} ...``.

Exit codes: 0 success, 1 usage error, 2 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import bench
from .kernel import export_lp_format

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _parser() -> _Parser:
    p = _Parser(prog="ssg-design", description="Payoff and coverage design for security games.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("--norm", required=True, choices=bench.NORMS)
    s.add_argument("--instance", required=True, metavar="FILE")
    s.add_argument("--algorithm", help="default: bnb / l0 / linf")
    s.add_argument("--rho0", type=float, help="atomic change for the L1 MILPs")
    s.add_argument("--eta", type=float, default=0.05, help="PTAS step")
    s.add_argument("--gap", type=float, default=0.01, help="relative MILP gap")
    s.add_argument("--node-limit", type=int, default=10**6)
    s.add_argument("--out", metavar="FILE", help="also write the JSON here")

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--norm", choices=bench.NORMS, help="budget kind; default: all three")
    g.add_argument("--resources", type=float, default=1.0)
    g.add_argument("--out", metavar="FILE")

    b = sub.add_parser("bench", help="run an experiment config")
    b.add_argument("--config", required=True, metavar="FILE")
    b.add_argument("--out", metavar="FILE", help="override the CSV path")
    b.add_argument("--seed", type=int, help="override the config seed")

    e = sub.add_parser("export-milp", help="write a MILP in LP text format")
    e.add_argument("--instance", required=True, metavar="FILE")
    e.add_argument("--norm", required=True, choices=("l1", "l0"))
    e.add_argument("--subproblem", type=int, metavar="I",
                   help="L1 attack target (0-based); omit for the single MILP")
    e.add_argument("--rho0", type=float)
    e.add_argument("--out", metavar="FILE")
    return p


def _load(path, norm):
    try:
        return bench.load_instance(path, norm)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from None


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _solve(args):
    game, budget = _load(args.instance, args.norm)
    alg = args.algorithm or bench.ALGORITHMS[args.norm][0]
    known = set(bench.ALGORITHMS[args.norm]) | {a for a, t in bench.ALIASES.items()
                                                 if t in bench.ALGORITHMS[args.norm]}
    if alg not in known:
        raise UsageError(f"unknown algorithm {alg!r} for {args.norm}")
    sol = bench.run_algorithm(args.norm, alg, game, budget, rho0=args.rho0, eta=args.eta,
                              rel_gap=args.gap, node_limit=args.node_limit)
    text = json.dumps(sol.to_dict(), indent=2) + "\n"
    sys.stdout.write(text)
    if args.out:
        _emit(text, args.out)


def _gen(args):
    if args.n < 1:
        raise UsageError("--n must be positive")
    norms = [args.norm] if args.norm else list(bench.NORMS)
    budgets = {}
    game = None
    for norm in norms:
        game, budgets[norm] = bench.gen_instance(args.n, args.seed, norm, args.resources)
    _emit(json.dumps(bench.instance_to_dict(game, budgets), indent=2) + "\n", args.out)


def _bench(args):
    try:
        cfg = bench.ExperimentConfig.from_file(args.config)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad config {args.config}: {exc}") from None
    if args.seed is not None:
        cfg.seed = args.seed
    rows = bench.run_experiment(cfg, args.out)
    failed = sum(r["status"].startswith("error") for r in rows)
    print(f"{len(rows)} rows written to {args.out or cfg.output}; {failed} failed", file=sys.stderr)


def _export(args):
    from . import l0, l1
    game, budget = _load(args.instance, args.norm)
    if args.norm == "l0":
        model = l0.build_l0_milp(game, budget)
    else:
        rho = args.rho0 if args.rho0 is not None else l1.default_rho0(game)
        disc = l1.Discretization.for_budget(game, budget, rho)
        if args.subproblem is None:
            model = l1.build_single_milp(game, budget, disc)
        else:
            if not 0 <= args.subproblem < game.n:
                raise UsageError(f"--subproblem must be in [0, {game.n - 1}]")
            model = l1.build_ap_i(game, args.subproblem, budget, disc)
    _emit(export_lp_format(model), args.out)


_COMMANDS = {"solve": _solve, "gen": _gen, "bench": _bench, "export-milp": _export}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:           # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
