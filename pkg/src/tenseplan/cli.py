"""Command-line front end.

    tenseplan plan --scenario scene.toml --out results/
    tenseplan check --scenario scene.toml
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .errors import (
    DimensionError, NoFeasiblePath, InvalidEndpoint, ParseError, StageError, ValidationError,
)
from .pipeline import run_pipeline
from .report import emit_failure, emit_outputs
from .scenario import load_scenario, validate_scenario, with_overrides

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4

log = logging.getLogger("tenseplan")


def exit_code_for(error):
    if isinstance(error, StageError):
        error = error.error
    if isinstance(error, (ParseError, ValidationError, DimensionError, ValueError)):
        return EXIT_VALIDATION
    if isinstance(error, (NoFeasiblePath, InvalidEndpoint)):
        return EXIT_INFEASIBLE
    return EXIT_SOLVER


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tenseplan",
        description="Collision-free path and whole-body motion planning for planar tensegrity manipulators.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="plan a path and the whole-body motion")
    plan.add_argument("--scenario", required=True, help="scenario TOML file")
    plan.add_argument("--out", required=True, help="output directory")
    plan.add_argument("--coarse", type=int, metavar="FACTOR",
                      help="enable the two-level path search with this cell size")
    plan.add_argument("--corridor", type=int, metavar="CELLS", help="corridor margin in coarse cells")
    plan.add_argument("--tol", type=float, metavar="EQ_TOL", help="equality tolerance")
    plan.add_argument("--max-iters", type=int, metavar="K", help="active-set iteration cap")
    plan.add_argument("--seed", type=int, default=0, help="seed for singularity escapes")
    plan.add_argument("--snapshot-every", type=int, default=10, metavar="K",
                      help="arm snapshot stride in the plot data")
    plan.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    check = sub.add_parser("check", help="validate a scenario without planning")
    check.add_argument("--scenario", required=True, help="scenario TOML file")
    return parser


def _load(args):
    s = load_scenario(args.scenario)
    if args.command == "plan":
        s = with_overrides(s, args.coarse, args.corridor, args.tol, args.max_iters)
    return s


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        s = _load(args)
        validate_scenario(s)
    except OSError as exc:
        log.error("cannot read scenario: %s", exc)
        return EXIT_VALIDATION
    except (ParseError, ValidationError, ValueError) as exc:
        log.error("invalid scenario: %s", exc)
        return EXIT_VALIDATION

    if args.command == "check":
        log.info("scenario ok: n=%d, %d obstacles, %dx%d grid",
                 s.geometry.n, len(s.world), s.grid.rows, s.grid.cols)
        return EXIT_OK

    try:
        report = run_pipeline(s, rng=np.random.default_rng(args.seed))
    except StageError as exc:
        code = exit_code_for(exc)
        log.error("%s", exc)
        emit_failure(args.out, exc.stage, exc.error, code)
        return code

    paths = emit_outputs(report, args.out, snapshot_every=args.snapshot_every,
                         figures=not args.no_figures)
    sm = report.summary
    log.info("path cost %.6g, %d steps, total joint motion %.6g, final error %.3g",
             sm["path_cost"], sm["steps"], sm["total_joint_motion"], sm["final_error"])
    for name, path in paths.items():
        log.debug("wrote %s: %s", name, path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
