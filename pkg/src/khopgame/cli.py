"""Command-line interface for the experiment harness.

Exit codes: 0 on success, 1 for configuration/validation problems, 2 for
dataset problems (unreadable file or parse failure).
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    ConfigError,
    ExperimentConfig,
    compare_gain_methods,
    run_experiment,
    write_csv,
)
from .network import EdgeListParseError
from .policy import POLICY_NAMES


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise ConfigError(message)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--dataset", required=True, help="edge-list file")
    sub.add_argument("--k", type=int, required=True, help="hop limit")
    sub.add_argument("--revenue", required=True, help="comma list r0,r1,...,rk")
    sub.add_argument("--budgets", required=True, help="comma list of budgets")
    sub.add_argument("--reps", type=int, default=50, help="repetitions per cell")
    sub.add_argument("--default-p", type=float, default=0.5, help="edge probability when absent")
    sub.add_argument("--theta", default="uniform", help="uniform | const:<v> | file:<path>")
    sub.add_argument("--theta-seed", type=int, default=None,
                     help="freeze the acceptance draw across runs")
    sub.add_argument("--gain", default="fast", help="fast | mc:<r> | exact")
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--out", default=None, help="CSV output path (stdout when omitted)")
    sub.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    sub.add_argument("--no-timings", action="store_true",
                     help="write wall_ms as 0 for byte-identical output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="khopgame", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run policies over a budget grid")
    _add_common(run)
    run.add_argument("--policies", default="adaptive",
                     help="comma list from: " + ",".join(POLICY_NAMES))

    cmp = subs.add_parser("compare-gain", help="fast vs Monte-Carlo gain comparison")
    _add_common(cmp)
    return parser


def _config_from(args: argparse.Namespace, policies: tuple[str, ...]) -> ExperimentConfig:
    try:
        revenue = tuple(float(x) for x in args.revenue.split(","))
        budgets = tuple(int(x) for x in args.budgets.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad numeric list: {exc}") from None
    return ExperimentConfig(
        dataset=args.dataset,
        default_p=args.default_p,
        theta=args.theta,
        k=args.k,
        revenue=revenue,
        budgets=budgets,
        policies=policies,
        reps=args.reps,
        gain=args.gain,
        master_seed=args.seed,
        theta_seed=args.theta_seed,
        jobs=args.jobs,
        timings=not args.no_timings,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            policies = tuple(p.strip() for p in args.policies.split(",") if p.strip())
            config = _config_from(args, policies)
            rows = run_experiment(config)
        else:
            config = _config_from(args, ("adaptive",))
            rows = compare_gain_methods(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EdgeListParseError, OSError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return 2

    if args.out:
        write_csv(rows, args.out)
    else:
        write_csv(rows, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
