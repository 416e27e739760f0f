"""Command line entry point: ``coactive run [CONFIG] [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import config as config_mod
from .config import ConfigError, ExperimentConfig
from .runner import RunAborted, run_experiment

EXIT_CONFIG = 2
EXIT_ABORTED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coactive",
                                     description="Coactive-learning regret simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write CSV traces")
    run.add_argument("config", nargs="?", help="key = value config file")
    run.add_argument("--task", choices=config_mod.TASKS)
    run.add_argument("--learner", choices=config_mod.LEARNERS)
    run.add_argument("--user")
    run.add_argument("--alpha")
    run.add_argument("--T")
    run.add_argument("--seeds", help="comma separated, e.g. 0,1,2")
    run.add_argument("--out")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override any config key (repeatable)")
    run.add_argument("-v", "--verbose", action="store_true")

    sub.add_parser("default-config", help="print the default config")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = config_mod.load(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    for key in ("task", "learner", "user", "alpha", "T", "seeds", "out"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return config_mod.apply_overrides(cfg, overrides).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "default-config":
        sys.stdout.write(config_mod.serialize(ExperimentConfig()))
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        result = run_experiment(cfg)
    except (ConfigError, OSError) as exc:
        print(f"coactive: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunAborted as exc:
        where = f"; partial trace at {exc.path}" if exc.path else ""
        print(f"coactive: {exc}{where}", file=sys.stderr)
        return EXIT_ABORTED
    final = result.aggregate["regret_avg_mean"][-1]
    print(f"wrote {len(result.paths)} files to {cfg.out}; final REG_T = {final:.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
