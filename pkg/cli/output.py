# cli/output.py
"""Human and JSON renderings of every command's report."""
from typing import List, Sequence

from core import calculus as lc
from core.coeffect_inference import (CoeffectJudgment, coeffect_to_json,
                                     format_coeffect_judgment)
from core.effect_algebra import format_index, index_tokens
from core.effect_inference import EffectJudgment, format_judgment
from core.errors import GradedError
from core.reports import LawReport
from core.semantics import ExecutionReport
from core.utils import dump_json, env_to_json, report_to_json, value_to_json


def _table(headers: Sequence[str], rows: List[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def check_output(j: EffectJudgment, fmt: str, indent: int = 2) -> str:
    if fmt == "json":
        return dump_json({
            "algebra": j.algebra.name,
            "judgment": format_judgment(j),
            "type": lc.format_type(j.type),
            "effect": index_tokens(j.effect),
        }, indent)
    return format_judgment(j) + "\n"


def annotate_output(data: dict, indent: int = 2) -> str:
    return dump_json(data, indent)


def coeffect_output(j: CoeffectJudgment, split: str, fmt: str, indent: int = 2) -> str:
    if fmt == "json":
        return dump_json({
            "judgment": format_coeffect_judgment(j),
            "coeffect": format_index(j.coeffect),
            "type": lc.format_type(j.type),
            "split": split,
            "lets": [entry.to_json() for entry in j.liveness],
            "derivation": coeffect_to_json(j),
        }, indent)
    text = format_coeffect_judgment(j) + "\n"
    if j.liveness:
        rows = [[str(entry.let_id), entry.name, "live" if entry.live else "dead",
                 f"{entry.line}:{entry.column}" if entry.line else "-", entry.bound]
                for entry in j.liveness]
        text += "\n" + _table(["let", "name", "status", "at", "bound"], rows) + "\n"
    return text


def eval_output(report: ExecutionReport, fmt: str, indent: int = 2) -> str:
    if fmt == "json":
        return dump_json(report_to_json(report), indent)
    lines = [f"instance: {report.instance}",
             f"value:    {report.value}",
             f"effect:   {format_index(report.effect)}"]
    if report.instance == "memory":
        lines.append(f"writes:   {env_to_json(report.writes)}")
        lines.append(f"store:    {env_to_json(report.store)}")
    if report.instance == "trace":
        emitted = ", ".join(f"{tag} {value_to_json(value)}" for tag, value in report.trace)
        lines.append(f"trace:    [{emitted}]")
    if report.coeffect is not None:
        lines.append(f"coeffect: {format_index(report.coeffect)}")
        for entry in report.lets:
            status = "live" if entry["live"] else "dead"
            lines.append(f"  let {entry['name']} (#{entry['id']}): {status}, "
                         f"evaluated {entry['evaluations']}x")
    return "\n".join(lines) + "\n"


def laws_output(reports: Sequence[LawReport], passed: bool, fmt: str, indent: int = 2) -> str:
    if fmt == "json":
        return dump_json({"passed": passed, "reports": [report.to_json() for report in reports]}, indent)
    rows = []
    for report in reports:
        sizes = ", ".join(f"{name}={size}" for name, size in sorted(report.domain_sizes.items()))
        verdict = report.verdict.value if report.required else f"({report.verdict.value})"
        rows.append([report.instance, report.law, verdict, sizes or "-"])
    text = _table(["instance", "law", "verdict", "domains"], rows) + "\n"
    for report in reports:
        if report.counterexample is None:
            continue
        text += f"\n{report.instance} / {report.law}:"
        if report.note:
            text += f" {report.note}"
        text += "\n"
        for key in sorted(report.counterexample):
            text += f"  {key}: {report.counterexample[key]}\n"
    text += f"\n{'PASS' if passed else 'FAIL'}\n"
    return text


def diagnostic_output(error: GradedError, fmt: str, indent: int = 2) -> str:
    diag = error.diagnostic()
    if fmt == "json":
        return dump_json({"diagnostic": diag}, indent)
    where = f"{diag['line']}:{diag['column']}: " if diag["line"] is not None else ""
    return f"error[{diag['kind']}] {where}{diag['message']}\n"
