# cli/commands.py
import copy
import logging
import sys
from dataclasses import dataclass, field
from typing import Optional, TextIO

from cli import output
from config import DEFAULT_CONFIG
from core import calculus as lc
from core import values as sv
from core.coeffect_inference import infer_coeffect
from core.effect_algebra import EffectAlgebra, lattice_algebra
from core.effect_inference import annotation, infer_effect, replay_annotation
from core.errors import GradedError
from core.indexed_monad import INSTANCE_NAMES, build_instance
from core.law_harness import LAW_INSTANCES, run_law_suite, suite_passed
from core.semantics import eval_program, select_instance_name
from core.utils import load_inputs

logger = logging.getLogger(__name__)

COMMANDS = ("check", "coeffect", "eval", "laws", "annotate")
FORMATS = ("human", "json")

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad invocation: unreadable files, unknown instance, ambiguous signature."""


@dataclass
class CliConfig:
    command: str
    source: Optional[str] = None            # program file; None or "-" reads stdin
    instance: Optional[str] = None
    inputs: Optional[str] = None
    format: str = "human"
    budget: Optional[int] = None
    seed: Optional[int] = None
    mutants: bool = False
    settings: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_CONFIG))

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}; choose from {', '.join(FORMATS)}")
        allowed = LAW_INSTANCES if self.command == "laws" else INSTANCE_NAMES
        if self.instance is not None and self.instance not in allowed:
            raise UsageError(f"unknown instance {self.instance!r} for {self.command}; "
                             f"choose from {', '.join(allowed)}")
        if self.inputs is not None and self.command != "eval":
            raise UsageError("--inputs only applies to eval")


def _read_source(config: CliConfig, stdin: TextIO) -> str:
    if config.source in (None, "-"):
        return stdin.read()
    try:
        with open(config.source, 'r', encoding='utf-8') as f:
            return f.read()
    except OSError as e:
        raise UsageError(f"cannot read {config.source}: {e.strerror}")
    except UnicodeDecodeError as e:
        raise UsageError(f"cannot read {config.source}: not UTF-8 text ({e.reason} at byte {e.start})")


def _algebra(config: CliConfig, sig: lc.Signature) -> EffectAlgebra:
    """The chosen instance's algebra, or the full effect lattice when none is chosen."""
    if config.instance is None:
        return lattice_algebra(sig)
    return build_instance(config.instance, sig, config.settings["trace"]["max_len"]).algebra


def _check(config: CliConfig, source: str) -> str:
    sig, term = lc.parse(source)
    j = infer_effect(sig, _algebra(config, sig), {}, term)
    return output.check_output(j, config.format, config.settings["output"]["indent"])


def _annotate(config: CliConfig, source: str) -> str:
    sig, term = lc.parse(source)
    alg = _algebra(config, sig)
    data = annotation(sig, infer_effect(sig, alg, {}, term))
    replay_annotation(data, alg)
    return output.annotate_output(data, config.settings["output"]["indent"])


def _coeffect(config: CliConfig, source: str) -> str:
    sig, term = lc.parse(source)
    split = config.settings["coeffects"]["lambda_split"]
    j = infer_coeffect(sig, {}, term, split)
    return output.coeffect_output(j, split, config.format, config.settings["output"]["indent"])


def _eval(config: CliConfig, source: str) -> str:
    sig, term = lc.parse(source)
    try:
        instance = config.instance or select_instance_name(sig)
    except ValueError as e:
        raise UsageError(str(e))
    try:
        inputs = load_inputs(config.inputs, sig)
    except OSError as e:
        raise UsageError(f"cannot read {config.inputs}: {e.strerror}")
    report = eval_program(term, inputs, sig, instance, config.settings)
    return output.eval_output(report, config.format, config.settings["output"]["indent"])


def _laws(config: CliConfig, source: Optional[str]):
    sig = lc.parse(source)[0] if source is not None else None
    instances = (config.instance,) if config.instance else LAW_INSTANCES
    reports = run_law_suite(instances, sig, config.settings, config.budget, config.seed,
                            mutants=config.mutants)
    passed = suite_passed(reports)
    for report in reports:
        logger.info("%s %s: %s", report.instance, report.law, report.verdict.value)
    text = output.laws_output(reports, passed, config.format, config.settings["output"]["indent"])
    return text, passed


def run(config: CliConfig, stdout: TextIO = None, stdin: TextIO = None) -> int:
    """Execute one command; the report goes to stdout and the exit status is returned."""
    stdout = stdout or sys.stdout
    stdin = stdin or sys.stdin
    indent = config.settings["output"]["indent"]
    try:
        config.validate()
        sv.set_function_equality_limit(config.settings["semantics"]["function_equality_limit"])
        if config.command == "laws":
            source = _read_source(config, stdin) if config.source else None
            text, passed = _laws(config, source)
            stdout.write(text)
            return EXIT_OK if passed else EXIT_ANALYSIS
        source = _read_source(config, stdin)
        handler = {"check": _check, "annotate": _annotate, "coeffect": _coeffect, "eval": _eval}
        stdout.write(handler[config.command](config, source))
        return EXIT_OK
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except GradedError as e:
        logger.debug("%s failed: %s", config.command, e)
        stdout.write(output.diagnostic_output(e, config.format, indent))
        return EXIT_ANALYSIS
