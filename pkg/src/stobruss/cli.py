"""Command-line entry point: ``stobruss <preset|run> [options]``."""
from __future__ import annotations

import argparse
import sys

from .config import help_text
from .exceptions import ConfigError, IntegrationFault, StobrussError
from .presets import GENERIC, PRESETS, run_preset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAULT = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    presets = "\n".join(f"  {name:<20} {desc}" for name, (desc, _, _) in PRESETS.items())
    epilog = (f"presets:\n{presets}\n  {GENERIC:<20} single field run from --config / --set values\n\n"
              f"{help_text()}\n\n"
              "A result CSV can be passed to --config; its '# config:' preamble reproduces the run.\n"
              "STOBRUSS_THREADS caps ensemble parallelism.\n"
              "exit codes: 0 ok, 2 config error, 3 integration fault, 4 IO error")
    p = _Parser(prog="stobruss", description="Stochastic Brusselator experiments with CSV output.",
                epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", metavar="preset|run", help="preset name or 'run'")
    p.add_argument("--config", metavar="FILE", help="key = value file, or a result CSV to re-run")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides 'out')")
    p.add_argument("--seed", type=int, metavar="N", help="base seed (overrides 'seed')")
    p.add_argument("--set", dest="sets", action="append", default=[], metavar="key=value",
                   help="override one config key; repeatable")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    sets = list(args.sets)
    if args.seed is not None:
        sets.append(f"seed={args.seed}")
    try:
        text = ""
        if args.config:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                print(f"stobruss: cannot read config {args.config}: {exc.strerror}", file=sys.stderr)
                return EXIT_IO
        written = run_preset(args.command, sets, args.out, text)
    except ConfigError as exc:
        where = f"{args.config}: " if args.config and exc.line is not None else ""
        print(f"stobruss: config error: {where}{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationFault as exc:
        print(f"stobruss: integration fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except OSError as exc:
        print(f"stobruss: IO error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except StobrussError as exc:
        print(f"stobruss: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name, path in written.items():
        print(f"{name}\t{path}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
