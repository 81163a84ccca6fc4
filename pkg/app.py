# app.py
#!/usr/bin/env python3
import argparse
import logging
import os
import sys
from pathlib import Path

from cli.commands import COMMANDS, FORMATS, CliConfig, run
from config import init_config
from core.law_harness import LAW_INSTANCES


def find_project_root():
    """The directory holding app.py (and graded.json / .env, if present)."""
    return Path(os.path.dirname(os.path.abspath(__file__)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graded",
        description="Indexed monads and comonads as the semantics of a small effectful λ-calculus.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "check": "infer Γ ⊢ e : τ, F",
        "coeffect": "infer Γ ? F ⊢ e : τ and the let liveness table",
        "eval": "run a closed program through its denotation",
        "annotate": "dump the derivation tree with coercion sites as JSON",
        "laws": "check the indexed monad/comonad laws",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=helps[name])
        if name == "laws":
            cmd.add_argument("program", nargs="?", help="program whose signature to use")
            cmd.add_argument("--instance", choices=LAW_INSTANCES)
            cmd.add_argument("--mutants", action="store_true",
                             help="also run the seeded law-breaking instances")
        else:
            cmd.add_argument("program", nargs="?", default="-", help="program file (default: stdin)")
            cmd.add_argument("--instance", choices=("reader", "memory", "trace", "identity"))
        if name == "eval":
            cmd.add_argument("--inputs", help='JSON file {"env": {...}, "store": {...}}')
        cmd.add_argument("--format", choices=FORMATS)
        cmd.add_argument("--budget", type=int)
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--config", help="JSON config file (default: graded.json)")
    return parser


def main(argv=None):
    """Main application entry point."""
    args = build_parser().parse_args(argv)

    # Initialize configuration
    settings = init_config(find_project_root(), args.config)
    if args.format:
        settings["output"]["format"] = args.format
    if args.budget is not None:
        settings["laws"]["budget"] = args.budget
    if args.seed is not None:
        settings["laws"]["seed"] = args.seed

    logging.basicConfig(stream=sys.stderr,
                        level=getattr(logging, str(settings["logging"]["level"]).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")

    config = CliConfig(
        command=args.command,
        source=args.program,
        instance=args.instance,
        inputs=getattr(args, "inputs", None),
        format=settings["output"]["format"],
        budget=args.budget,
        seed=args.seed,
        mutants=getattr(args, "mutants", False),
        settings=settings,
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
