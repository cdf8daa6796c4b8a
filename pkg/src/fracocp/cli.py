"""Command-line entry point.

    fracocp simulate --config FILE [--alpha A]
    fracocp optimize --config FILE [--paper-adjoint]
    fracocp compare  --config FILE [--svg] [--jobs N] [--output-dir D] [--paper-adjoint]

Exit codes: 0 success (non-convergence is reported in summary.csv),
1 configuration error, 2 numerical abort, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .focp import AdjointMode
from .scenario import (
    CONTROLLED,
    EXIT_CONFIG,
    EXIT_OK,
    UNCONTROLLED,
    VARIANTS,
    ScenarioError,
    run_scenario,
    with_overrides,
)

log = logging.getLogger("fracocp")


def _alpha(text: str) -> float:
    value = float(text)
    if not (0 < value <= 1):
        raise argparse.ArgumentTypeError("alpha must lie in (0,1]")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracocp",
        description="Fractional-order COVID-19 model: simulation and optimal control.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log every item")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON scenario file")
        p.add_argument("--output-dir", help="override output_dir from the config")
        p.add_argument("--jobs", type=_positive_int, default=1, help="parallel items (default 1)")

    sim = sub.add_parser("simulate", help="uncontrolled trajectories only")
    common(sim)
    sim.add_argument("--alpha", type=_alpha, help="run a single order instead of the config list")

    opt = sub.add_parser("optimize", help="forward-backward sweep for every order")
    common(opt)
    opt.add_argument("--paper-adjoint", action="store_true", help="use the adjoint system as printed")

    cmp_ = sub.add_parser("compare", help="uncontrolled and optimal runs side by side")
    common(cmp_)
    cmp_.add_argument("--svg", action="store_true", help="also write fig_S/E/I/R.svg")
    cmp_.add_argument("--paper-adjoint", action="store_true", help="use the adjoint system as printed")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if getattr(args, "paper_adjoint", False):
        config = with_overrides(config, adjoint_mode=AdjointMode.PAPER_PRINTED)
    variants = {"simulate": (UNCONTROLLED,), "optimize": (CONTROLLED,), "compare": VARIANTS}[args.command]
    alphas = (args.alpha,) if getattr(args, "alpha", None) is not None else None

    try:
        result = run_scenario(
            config,
            variants=variants,
            alphas=alphas,
            svg=getattr(args, "svg", False),
            jobs=args.jobs,
            output_dir=args.output_dir,
        )
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code

    for item in result.items:
        status = "" if item.converged else "  (not converged)"
        print(f"{item.variant:>12} alpha={item.alpha:<5} J={item.objective:.10g}{status}")
    print(f"summary: {result.summary_path}")
    for path in result.figure_paths:
        print(f"figure: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
