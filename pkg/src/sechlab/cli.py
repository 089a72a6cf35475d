"""Command-line front end.

    sechlab theorem1 --dist sech --n 100000 --trials 20 --seed 42
    sechlab fixed-point --sigma 1.5707963 --depth 30 --seed 0 --format csv

Exit status: 0 when the experiment's acceptance predicate holds, 1 when it
does not, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .experiments import (
    BASES,
    DISTS,
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    run_experiment,
    write_report,
)

__all__ = ["parse_cli", "build_parser", "main"]

# argparse dest -> ExperimentConfig field
_FIELD = {
    "n": "n_samples",
    "n_param": "n_param",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _normalization(text):
    key = text.replace("-", "_")
    if key not in ("inv_n", "inv_sqrt_n"):
        raise argparse.ArgumentTypeError("expected inv-n or inv-sqrt-n")
    return key


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--dist", choices=DISTS)
    common.add_argument("--scale", type=float)
    common.add_argument("--n", type=int, help="sample size (pairs for theorem2)")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=_u64, help="master seed (required unless given in --config)")
    common.add_argument("--alpha", type=float)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int, help="worker threads for trials")
    common.add_argument("--config", help="JSON file with defaults; flags take precedence")

    parser = _Parser(prog="sechlab", description="Hyperbolic secant characterization experiments.")
    parser.add_argument("--version", action="version", version=f"sechlab {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)

    sub.add_parser("theorem1", parents=[common], help="mixture identity, two-sample KS")
    t2 = sub.add_parser("theorem2", parents=[common], help="independence of the linear forms, dCov")
    t2.add_argument("--permutations", type=int, default=argparse.SUPPRESS)
    rs = sub.add_parser("random-sum", parents=[common], help="random sums with Chebyshev index")
    rs.add_argument("--n-param", type=int, default=argparse.SUPPRESS)
    rs.add_argument("--base", choices=BASES, default=argparse.SUPPRESS)
    rs.add_argument("--normalization", type=_normalization, default=argparse.SUPPRESS)
    rs.add_argument("--m", type=int, default=argparse.SUPPRESS)
    rs.add_argument("--tail-eps", type=float, default=argparse.SUPPRESS)
    fp = sub.add_parser("fixed-point", parents=[common], help="doubling solver of the functional equation")
    fp.add_argument("--t-max", type=float, default=argparse.SUPPRESS)
    fp.add_argument("--depth", type=int, default=argparse.SUPPRESS, help="doubling steps")
    fp.add_argument("--grid-depth", type=int, default=argparse.SUPPRESS, help="output grid has 2**d + 1 points")
    fp.add_argument("--sigma", type=float, default=argparse.SUPPRESS)
    sub.add_parser("dist", parents=[common], help="sampler fidelity checks")
    ix = sub.add_parser("index", parents=[common], help="dump the random-index pmf")
    ix.add_argument("--n-param", type=int, default=argparse.SUPPRESS, help="PGF order")
    ix.add_argument("--tail-eps", type=float, default=argparse.SUPPRESS)
    assert set(sub.choices) == set(EXPERIMENTS)
    return parser


def parse_cli(argv) -> ExperimentConfig:
    """Parse ``argv`` into a validated config.

    Raises ``SystemExit(2)`` with a usage message on any error.
    """
    parser = build_parser()
    try:
        ns = vars(parser.parse_args(argv))
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        raise SystemExit(2) from None
    experiment = ns.pop("experiment")
    settings = {}
    config_path = ns.pop("config", None)
    if config_path is not None:
        try:
            with open(config_path) as fh:
                settings.update(json.load(fh))
        except (OSError, ValueError) as exc:
            print(f"sechlab: error: cannot read config {config_path}: {exc}", file=sys.stderr)
            raise SystemExit(2) from None
        settings.pop("experiment", None)
        if "n" in settings:
            settings["n_samples"] = settings.pop("n")
        if "normalization" in settings:
            settings["normalization"] = str(settings["normalization"]).replace("-", "_")
    for key, value in ns.items():
        settings[_FIELD.get(key, key)] = value
    if "seed" not in settings:
        print("sechlab: error: --seed is required (every run must be replayable)", file=sys.stderr)
        raise SystemExit(2)
    try:
        return ExperimentConfig(experiment=experiment, **settings)
    except (ConfigError, TypeError) as exc:
        print(f"sechlab: error: {exc}", file=sys.stderr)
        raise SystemExit(2) from None


def main(argv=None) -> int:
    cfg = parse_cli(sys.argv[1:] if argv is None else argv)
    report = run_experiment(cfg)
    text = write_report(report, cfg.out, cfg.format)
    if cfg.out is None:
        sys.stdout.write(text)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{cfg.experiment}: {verdict} ({report.wall_clock:.2f} s)", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
