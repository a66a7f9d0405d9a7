"""Command-line entry point: ``risbeam run`` and ``risbeam sweep``."""

import argparse
import sys
from dataclasses import replace

from .errors import ConfigError
from .harness import SWEEP_AXES, ExperimentRunError, load_config, run_experiment, summarize


def _values(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(prog="risbeam", description="Feedback-based RIS/ISAC beam training experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="YAML config path or shipped config name (e.g. paper_fig2)")
        p.add_argument("--seeds", type=int, help="number of seeds (overrides run.n_seeds)")
        p.add_argument("--out", help="output directory (overrides output.path)")
        p.add_argument("--algorithm", choices=("afsa", "pso", "aco", "all"))
        p.add_argument("--budget-match", action="store_true", help="match PSO/ACO echo budgets to AFSA per seed")

    common(sub.add_parser("run", help="run a config as written"))
    sweep = sub.add_parser("sweep", help="run a config over a sweep axis")
    common(sweep)
    sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sweep.add_argument("--values", required=True, type=_values, help="comma-separated values")
    return parser


def _apply(config, args):
    kw = {}
    if args.seeds is not None:
        kw["n_seeds"] = args.seeds
    if args.out is not None:
        kw["output_path"] = args.out
    if args.algorithm is not None:
        kw["algorithm"] = args.algorithm
    if args.budget_match:
        kw["budget_match"] = True
    if args.command == "sweep":
        kw["sweep_axis"] = args.axis
        kw["sweep_values"] = args.values
    return replace(config, **kw) if kw else config


def _print_summary(rows, axis):
    print(f"{'alg':5} {axis or 'value':>10} {'median [W]':>13} {'dB':>9} {'feasible':>8} {'it95':>5}")
    for r in rows:
        val = "-" if r["sweep_value"] is None else format(r["sweep_value"], "g")
        print(
            f"{r['algorithm']:5} {val:>10} {r['median_fitness_w']:13.6e} "
            f"{r['median_fitness_db']:9.3f} {r['feasibility_rate']:8.2f} {r['median_iters_to_95']:5.0f}"
        )


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _apply(load_config(args.config), args)
        records = run_experiment(config)
    except (ConfigError, ExperimentRunError) as exc:
        print(f"risbeam: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"risbeam: error: {exc}", file=sys.stderr)
        return 1
    _print_summary(summarize(records), config.sweep_axis)
    print(f"wrote {config.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
