# core/errors.py
from typing import Any, List, Optional, Tuple


class GradedError(Exception):
    """Base class for every analysis, semantics and harness error."""

    kind = "error"

    def __init__(self, message: str, position: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.message = message
        self.position = position

    def diagnostic(self) -> dict:
        line, column = self.position if self.position else (None, None)
        return {"kind": self.kind, "message": self.message, "line": line, "column": column}


class SourceSyntaxError(GradedError):
    kind = "syntax"

    def __init__(self, line: int, col: int, expected: List[str]):
        shown = ", ".join(sorted(expected)) if expected else "end of input"
        super().__init__(f"unexpected input at {line}:{col}, expected one of: {shown}", (line, col))
        self.line = line
        self.col = col
        self.expected = sorted(expected)


class ScopeError(GradedError):
    kind = "scope"


class EffectTypeError(GradedError):
    kind = "type"


class NoLatticeError(GradedError):
    kind = "no-lattice"


class IndexOverflow(GradedError):
    kind = "index-overflow"


class EffectEscape(GradedError):
    kind = "effect-escape"

    def __init__(self, found: Any, declared: Any, rendered: Tuple[str, str] = None):
        found_text, declared_text = rendered or (repr(found), repr(declared))
        super().__init__(f"inferred effect {found_text} is not below declared {declared_text}")
        self.found = found
        self.declared = declared


class EnvDomainMismatch(GradedError):
    kind = "env-domain"


class IndexMismatch(GradedError):
    kind = "index-mismatch"


class AlgebraMismatch(GradedError):
    kind = "algebra-mismatch"


class InputMismatch(GradedError):
    kind = "input-mismatch"


class UnsupportedPrimitive(GradedError):
    kind = "unsupported-primitive"


class EnumerationBudgetExceeded(GradedError):
    kind = "budget"


class DerivationError(GradedError):
    kind = "derivation"
