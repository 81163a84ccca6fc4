# core/reports.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple


class Verdict(str, Enum):
    PASS = "pass"
    SAMPLED_PASS = "sampled-pass"
    FAIL = "fail"
    BUDGET_EXCEEDED = "budget-exceeded"
    NO_STRUCTURE = "no-structure-found"
    STRUCTURE_FOUND = "structure-found"
    INCONCLUSIVE = "inconclusive"
    INAPPLICABLE = "inapplicable"

    @property
    def ok(self) -> bool:
        return self in (Verdict.PASS, Verdict.SAMPLED_PASS)


@dataclass
class LawReport:
    """Outcome of checking one law on one instance.

    A failing report always carries the raw inputs in `witness` so the
    check can be replayed, plus a rendered `counterexample` for output.
    """

    law: str
    instance: str
    verdict: Verdict
    domain_sizes: Dict[str, int] = field(default_factory=dict)
    counterexample: Optional[Dict[str, Any]] = None
    witness: Optional[Tuple[Any, ...]] = None
    required: bool = True
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict.ok

    def to_json(self) -> Dict[str, Any]:
        data = {
            "law": self.law,
            "instance": self.instance,
            "verdict": self.verdict.value,
            "domain_sizes": dict(sorted(self.domain_sizes.items())),
            "required": self.required,
        }
        if self.counterexample is not None:
            data["counterexample"] = self.counterexample
        if self.note:
            data["note"] = self.note
        return data


def render(value) -> str:
    if isinstance(value, tuple):
        return "(" + ", ".join(render(item) for item in value) + ")"
    if isinstance(value, frozenset):
        return "{" + ", ".join(sorted(str(item) for item in value)) + "}"
    return str(value)


def failure(law: str, instance: str, inputs: Tuple[Any, ...], lhs, rhs,
            sizes: Dict[str, int] = None, required: bool = True) -> LawReport:
    return LawReport(
        law=law,
        instance=instance,
        verdict=Verdict.FAIL,
        domain_sizes=sizes or {},
        counterexample={
            "inputs": [render(item) for item in inputs],
            "lhs": render(lhs),
            "rhs": render(rhs),
        },
        witness=tuple(inputs),
        required=required,
    )
