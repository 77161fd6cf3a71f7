"""``tqdsim`` command line.

Exit codes: 0 on success, 2 for configuration errors, 3 when a numerical
guard (step size, degeneracy, gauge continuity) rejects the run.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .dynamics import StepSizeError
from .experiments import EXPERIMENTS, OUTPUT_ENV, ConfigError, RunConfig, run
from .quantum_core import DegeneracyError
from .tqd_engine import GaugeContinuityError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICS = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _on_off(v: str) -> bool:
    low = v.lower()
    if low not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return low == "on"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tqdsim", description="Transitionless quantum driving simulations.")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="flat key = value file")
        p.add_argument("--tau", type=float, help="total time in seconds (largest time for gate-z)")
        p.add_argument("--steps", type=int, help="propagation steps per run")
        p.add_argument("--noise", type=_on_off, help="on|off")
        p.add_argument("--protocols", help="comma list of a,s,o")
        p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./tqdsim_output)")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int, help="process pool size (default: number of CPUs)")
        p.add_argument("--points", type=int, help="number of sweep points")
        p.add_argument("--n", dest="n_steps", type=int, help="Trotter count for compile")
        p.add_argument("--pulse-error", dest="pulse_error", type=float)
        p.add_argument("--emit-config", action="store_true", help="print the resolved config and exit")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.default(args.experiment)
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        cfg = RunConfig.parse(text, base=cfg)
        if cfg.experiment != args.experiment:
            cfg = replace(cfg, experiment=args.experiment)
    overrides = {k: getattr(args, k) for k in ("tau", "steps", "noise", "out", "seed", "workers", "points",
                                               "n_steps", "pulse_error") if getattr(args, k) is not None}
    if args.protocols is not None:
        overrides["protocols"] = tuple(x.strip() for x in args.protocols.split(",") if x.strip())
    return replace(cfg, **overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.emit_config:
            sys.stdout.write(cfg.emit())
            return EXIT_OK
        written = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepSizeError, DegeneracyError, GaugeContinuityError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
