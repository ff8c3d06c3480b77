import argparse
import logging
import os
from pathlib import Path
import sys
from typing import Optional, Sequence

from pydantic import ValidationError
import torch

from errors import PotbalError
from loaders import SourceError
from runner import CommandType, OutputFormat, RunConfig, Runner
from utils import Verdict

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNBOUNDED = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so main() owns every exit code."""

    def error(self, message):
        raise SourceError(message)


def build_parser() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--nmax", dest="n_max", type=int, default=14)
    common.add_argument("--slope-tol", type=float, default=0.05)
    common.add_argument("--quad-tol", type=float, default=1e-9)
    common.add_argument("--trunc", type=float, default=1e4)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value)
    common.add_argument("--output", "-o")
    common.add_argument("--assert-bounded", action="store_true")
    common.add_argument("--quiet", "-q", action="store_true")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = ArgumentParser(prog="potbal", description="Balayage and zero-distribution criteria.")
    commands = parser.add_subparsers(dest="command", required=True)

    def command(kind: CommandType, actions: Optional[list[str]] = None, **kwargs):
        sub = commands.add_parser(kind.value, parents=[common], **kwargs)
        if actions:
            sub.add_argument("action", choices=actions)
        return sub

    ell = command(CommandType.ELL, help="logarithmic interval functions")
    ell.add_argument("--nu", required=True)
    ell.add_argument("--r", type=float)
    ell.add_argument("--R", type=float)

    lindelof = command(CommandType.LINDELOF, help="Lindelof sums on the dyadic grid")
    lindelof.add_argument("--nu", required=True)
    lindelof.add_argument("--kind", choices=["R", "iR", "full", "blaschke"], default="full")

    sweep = command(CommandType.SWEEP, help="balayage onto the imaginary axis or a strip")
    sweep.add_argument("--nu", required=True)
    sweep.add_argument("--genus", choices=["0", "1", "01"])
    sweep.add_argument("--strip", type=float)
    sweep.add_argument("--r0", type=float)
    sweep.add_argument("--y", help="comma separated heights at which to sample the distribution function")

    criterion = command(
        CommandType.CRITERION, ["dyadic", "pair", "shift", "mr", "eps", "mu-rh", "redheffer", "interval"]
    )
    criterion.add_argument("--nu", required=True)
    criterion.add_argument("--mu")
    criterion.add_argument("--M")
    criterion.add_argument("--w")
    criterion.add_argument("--eps", type=float)
    criterion.add_argument("--c", type=float)
    criterion.add_argument("--mirrored", action="store_true", default=None)
    criterion.add_argument("--samples", type=int)
    criterion.add_argument("--seed", type=int)

    construct = command(
        CommandType.CONSTRUCT, ["alpha", "uniformize", "uniformize-strip", "complete-r", "complete-ir", "complete"]
    )
    construct.add_argument("--nu", required=True)
    construct.add_argument("--mu")
    construct.add_argument("--a", type=float)
    construct.add_argument("--b", type=float)
    construct.add_argument("--factor", type=float)

    content = command(CommandType.CONTENT, help="Hausdorff content with a variable covering radius")
    content.add_argument("--nu", help="points of a distribution")
    content.add_argument("--segments", help="parameter intervals a:b,c:d")
    content.add_argument("--origin")
    content.add_argument("--direction")
    content.add_argument("--d", type=float, required=True)
    content.add_argument("--profile")
    content.add_argument("--chain", help="a second, larger radius profile")
    content.add_argument("--E", help="exceptional set placed on the imaginary axis")
    content.add_argument("--k-max", type=int)

    qe = command(CommandType.QE, help="the q_E gauge")
    qe.add_argument("--E", required=True)
    qe.add_argument("--r", required=True, help="comma separated radii")
    qe.add_argument("--gauge-t-max", type=float)

    mean = command(CommandType.MEANS, ["circle", "disk", "radial", "type", "jaxis"])
    mean.add_argument("--fn", required=True)
    mean.add_argument("--z")
    mean.add_argument("--r", type=float)
    mean.add_argument("--r-max", type=float)
    mean.add_argument("--samples", type=int)

    scan = command(CommandType.SCAN, help="sampled check of lhs <= rhs off an exceptional set")
    scan.add_argument("--lhs", required=True)
    scan.add_argument("--rhs", required=True)
    scan.add_argument("--domain", choices=["axis", "strip-lines", "strip-grid"])
    scan.add_argument("--y-max", type=float, required=True)
    scan.add_argument("--b", type=float)
    scan.add_argument("--samples", type=int)
    scan.add_argument("--x-samples", type=int)
    scan.add_argument("--E")
    return parser


def _configure_logging(args: argparse.Namespace):
    level = logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=level, force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    threads = os.environ.get("POTBAL_THREADS")
    if threads:
        torch.set_num_threads(int(threads))
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args)
        config = RunConfig.from_args(args)
        result = Runner(config).run()
    except (SourceError, ValidationError) as error:
        logger.error(f"invalid input: {error}")
        return EXIT_PARSE
    except PotbalError as error:
        logger.error(f"{type(error).__name__}: {error}")
        return EXIT_PRECONDITION

    text = result.render(config.output_format)
    if config.output:
        Path(config.output).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if config.assert_bounded and result.verdict is Verdict.UNBOUNDED:
        logger.warning("verdict Unbounded")
        return EXIT_UNBOUNDED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
