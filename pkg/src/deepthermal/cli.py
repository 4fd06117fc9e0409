"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical-consistency
error, 64 unknown subcommand.
"""
import argparse
import sys

from .config import EXPERIMENTS, load_config
from .errors import ConfigError, NumericalConsistencyError
from .experiments import run_and_write

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_USAGE = 0, 2, 3, 64

# flag -> (config key, help)
_FLAGS = [
    (("--L",), "L", "total number of modes (diffusion)"),
    (("--LA", "--la"), "LA", "modes in the kept subsystem A"),
    (("--LA1", "--la1"), "LA1", "modes of A entering entropy observables"),
    (("--LB", "--LB-list", "--lb"), "LB_list", "measured-subsystem sizes, comma separated"),
    (("--t", "--t-max"), "t_max", "last checkpoint (doubling grid from 1)"),
    (("--t-list",), "t_list", "explicit checkpoints, comma separated"),
    (("--t-fit",), "t_fit", "fit window 'tmin,tmax' for transient slopes"),
    (("--R",), "R", "shots per projected ensemble"),
    (("--R-list",), "R_list", "several shot counts, comma separated"),
    (("--N", "--instances"), "N", "circuit instances"),
    (("--alpha",), "alpha", "Renyi indices, comma separated (1 = von Neumann)"),
    (("--observable",), "observable", "observable id, e.g. corr:1,2 or vn:1..2"),
    (("--ghe-reference",), "ghe_reference", "auto | analytic | empirical"),
    (("--ghe-budget", "--budget"), "ghe_budget", "GHE Monte Carlo samples"),
    (("--dynamics",), "dynamics", "global | brickwork"),
    (("--mode",), "mode", "sampled | exhaustive"),
    (("--grid",), "grid", "grid points for ghe-cdf"),
    (("--k",), "k", "moment order"),
    (("--indices",), "indices", "moment index pairs, e.g. 1,2,1,2"),
    (("--sets",), "sets", "Majorana subsets per copy, e.g. 1,2;3,4"),
    (("--eps",), "eps_list", "epsilon grid, comma separated"),
    (("--seed",), "seed", "master seed"),
    (("--out-dir",), "out_dir", "output root directory"),
]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="deepthermal",
        description="Projected-ensemble experiments for free-fermion circuits.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="TOML config file or a previous manifest.json")
        for flags, key, text in _FLAGS:
            p.add_argument(*flags, dest=key, default=None, help=text)
        p.add_argument("--baseline", dest="baseline", action="store_const", const=True,
                       default=None, help="add GHE-vs-GHE baseline rows (w1-global)")
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv or argv[0] not in EXPERIMENTS:
        if argv and argv[0] in ("-h", "--help"):
            parser.print_help()
            return EXIT_OK
        parser.print_usage(sys.stderr)
        print(f"deepthermal: unknown subcommand {argv[0] if argv else '(none)'!r}; "
              f"choose from {', '.join(EXPERIMENTS)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    overrides = {key: getattr(args, key) for _, key, _ in _FLAGS}
    overrides["baseline"] = args.baseline
    try:
        cfg = load_config(args.config, overrides, experiment=args.command)
        path, _ = run_and_write(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalConsistencyError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(path)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
