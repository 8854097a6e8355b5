"""``genbound run | sweep | verify``."""
from __future__ import annotations

import argparse
import sys

from .core import BudgetExceeded
from .experiments import ConfigError, ExperimentConfig, format_verify, run, sweep, verify

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_INVARIANT = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="genbound", description="Exact generalization-bound experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("run", "evaluate quantities and bounds"),
                        ("sweep", "run over n_list and fit log-log slopes"),
                        ("verify", "check the invariant suite")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="JSON experiment config")
        s.add_argument("--example", help="example name (instead of a config file)")
        s.add_argument("--n", type=int, action="append", help="sample size; repeat for several")
        s.add_argument("--mode", choices=("exact", "mc"))
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int, help="Monte Carlo sample count")
        s.add_argument("--out", help="output CSV path (default stdout)")
        s.add_argument("--budget", type=int, help="enumeration budget in weighted outcomes")
    return p


def load_config(args):
    if args.config:
        data = ExperimentConfig.load(args.config).to_dict()
    elif args.example:
        data = {"example": args.example, "n_list": args.n or []}
    else:
        raise ConfigError("pass --config or --example")
    if args.n and args.config:
        data["n_list"] = args.n
    for key, attr in (("mode", "mode"), ("seed", "seed"), ("mc_samples", "samples"),
                      ("out", "out"), ("budget", "budget")):
        v = getattr(args, attr)
        if v is not None:
            data[key] = v
    return ExperimentConfig.from_dict(data)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "run":
            text, _ = run(cfg)
            if not cfg.out or cfg.out == "-":
                sys.stdout.write(text)
        elif args.command == "sweep":
            text, _, slope_text, _ = sweep(cfg)
            if not cfg.out or cfg.out == "-":
                sys.stdout.write(text)
                sys.stdout.write("\n" + slope_text)
        else:
            ok, results = verify(cfg)
            sys.stdout.write(format_verify(cfg, results))
            if not ok:
                return EXIT_INVARIANT
    except ConfigError as exc:
        print(f"genbound: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"genbound: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
