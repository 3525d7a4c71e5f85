"""Run an experiment config and print mean value, gap and time per size and algorithm.

    python3 scripts/run_experiment.py scripts/configs/l0_small.json
"""
import argparse
import statistics
import sys
from collections import defaultdict

from ssg_design.bench import ExperimentConfig, read_results, run_experiment


def summarize(rows):
    groups = defaultdict(list)
    for r in rows:
        groups[r["n"], r["algorithm"]].append(r)
    print(f"{'n':>5} {'algorithm':>10} {'mean value':>12} {'mean gap':>10} {'sem gap':>9} "
          f"{'ms':>9} {'failed':>6}")
    for (n, alg), rs in sorted(groups.items()):
        ok = [r for r in rs if r["value"] is not None]
        gaps = [r["gap"] for r in ok if r["gap"] is not None]
        mean = lambda xs: statistics.fmean(xs) if xs else float("nan")
        sem = statistics.stdev(gaps) / len(gaps) ** 0.5 if len(gaps) > 1 else 0.0
        print(f"{n:>5} {alg:>10} {mean([r['value'] for r in ok]):>12.4f} {mean(gaps):>10.4f} "
              f"{sem:>9.4f} {mean([r['wall_ms'] for r in rs]):>9.1f} {len(rs) - len(ok):>6}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config")
    p.add_argument("--out", help="CSV path (default: the config's output)")
    p.add_argument("--seed", type=int)
    p.add_argument("--summary-only", action="store_true", help="summarize an existing CSV")
    args = p.parse_args(argv)
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out = args.out or cfg.output
    rows = read_results(out) if args.summary_only else run_experiment(cfg, out)
    print(f"# {cfg.norm}: {len(rows)} rows in {out}", file=sys.stderr)
    summarize(rows)


if __name__ == "__main__":
    main()
