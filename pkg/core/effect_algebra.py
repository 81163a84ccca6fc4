# core/effect_algebra.py
"""Index algebras: monoids of effect annotations, optionally join-semilattices.

An algebra is a Monoid bundle (unit, lift, combine) over a finite carrier.
`leq` is present exactly for the lattice algebras that support sub-effecting.
"""
import functools
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, List, Optional, Tuple

from core.errors import (EnumerationBudgetExceeded, IndexOverflow, NoLatticeError,
                         UnsupportedPrimitive)
from core.reports import LawReport, Verdict, failure

logger = logging.getLogger(__name__)


class TokenKind(Enum):
    PARAM = "ip"
    READ = "rd"
    WRITE = "wr"
    OUT = "out"


@dataclass(frozen=True)
class EffectToken:
    kind: TokenKind
    name: str

    def __str__(self):
        return f"{self.kind.value} {self.name}"

    @classmethod
    def parse(cls, text: str) -> "EffectToken":
        prefix, _, name = text.strip().partition(" ")
        try:
            kind = TokenKind(prefix)
        except ValueError:
            raise ValueError(f"not an effect token: {text!r}") from None
        if not name.strip():
            raise ValueError(f"effect token {text!r} has no name")
        return cls(kind, name.strip())


def implicit_param(name: str) -> EffectToken:
    return EffectToken(TokenKind.PARAM, name)


def read_token(region: str) -> EffectToken:
    return EffectToken(TokenKind.READ, region)


def write_token(region: str) -> EffectToken:
    return EffectToken(TokenKind.WRITE, region)


def out_token(tag: str) -> EffectToken:
    return EffectToken(TokenKind.OUT, tag)


def _token_key(token: EffectToken) -> str:
    return str(token)


@dataclass(frozen=True)
class EffectAlgebra:
    name: str
    unit: Any
    combine: Callable[[Any, Any], Any] = field(compare=False, repr=False)
    enumerate_carrier: Callable[[], Tuple[Any, ...]] = field(compare=False, repr=False)
    leq: Optional[Callable[[Any, Any], bool]] = field(default=None, compare=False, repr=False)
    lift_token: Optional[Callable[[EffectToken], Any]] = field(default=None, compare=False, repr=False)
    generators: Tuple[Any, ...] = ()

    @functools.cached_property
    def carrier(self) -> Tuple[Any, ...]:
        return tuple(self.enumerate_carrier())

    @property
    def is_lattice(self) -> bool:
        return self.leq is not None

    def lift(self, token: EffectToken):
        if self.lift_token is None:
            raise UnsupportedPrimitive(f"primitive not supported by instance: algebra {self.name} "
                                       f"has no effect tokens ({token})")
        return self.lift_token(token)

    def from_tokens(self, tokens: Iterable[EffectToken]):
        return functools.reduce(self.combine, (self.lift(token) for token in tokens), self.unit)

    def combine_all(self, *indices):
        return functools.reduce(self.combine, indices, self.unit)

    def below(self, a, b) -> bool:
        if a == b:
            return True
        if self.leq is None:
            raise NoLatticeError(f"algebra {self.name} has no order; cannot weaken "
                                 f"{format_index(a)} to {format_index(b)}")
        return self.leq(a, b)

    def join(self, a, b):
        """Least upper bound; only lattices have one (it is combine there)."""
        if a == b:
            return a
        if self.leq is None:
            raise NoLatticeError(f"algebra {self.name} cannot join {format_index(a)} "
                                 f"and {format_index(b)}")
        return self.combine(a, b)

    def contains(self, index) -> bool:
        return index in self.carrier


def powerset_algebra(tokens: Iterable[EffectToken], name: str = "powerset") -> EffectAlgebra:
    """(P(tokens), ∪, ∅) ordered by inclusion."""
    generators = tuple(sorted(set(tokens), key=_token_key))

    def subsets():
        for size in range(len(generators) + 1):
            for combo in itertools.combinations(generators, size):
                yield frozenset(combo)

    def lift(token):
        if token not in generators:
            raise UnsupportedPrimitive(f"primitive not supported by instance: {token} "
                                       f"is not an index of algebra {name}")
        return frozenset([token])

    return EffectAlgebra(
        name=name,
        unit=frozenset(),
        combine=lambda a, b: a | b,
        enumerate_carrier=lambda: tuple(subsets()),
        leq=lambda a, b: a <= b,
        lift_token=lift,
        generators=generators,
    )


def lattice_algebra(sig) -> EffectAlgebra:
    """The effect lattice over every token a signature can produce."""
    return powerset_algebra(sig.tokens(), name="lattice")


def bool_conj_algebra() -> EffectAlgebra:
    """({f, t}, ∧, t); a plain monoid, no order."""
    return EffectAlgebra(
        name="bool-conj",
        unit=True,
        combine=lambda a, b: a and b,
        enumerate_carrier=lambda: (False, True),
    )


def trace_algebra(tags: Iterable[str], max_len: int) -> EffectAlgebra:
    """Sequences of output tags under concatenation, bounded by max_len."""
    if max_len < 1:
        raise ValueError("trace algebra needs max_len >= 1")
    generators = tuple(sorted(set(tags)))

    def sequences():
        for length in range(max_len + 1):
            for combo in itertools.product(generators, repeat=length):
                yield tuple(combo)

    def concat(a, b):
        joined = tuple(a) + tuple(b)
        if len(joined) > max_len:
            raise IndexOverflow(f"trace {format_index(joined)} is longer than max_len={max_len}")
        return joined

    def lift(token):
        if token.kind is not TokenKind.OUT or token.name not in generators:
            raise UnsupportedPrimitive(f"primitive not supported by instance: {token} "
                                       f"is not an index of the trace algebra")
        return (token.name,)

    return EffectAlgebra(
        name=f"trace[{max_len}]",
        unit=(),
        combine=concat,
        enumerate_carrier=lambda: tuple(sequences()),
        lift_token=lift,
        generators=generators,
    )


def trivial_algebra() -> EffectAlgebra:
    """The one-object monoid; indexed structures over it are ordinary ones."""
    return EffectAlgebra(
        name="trivial",
        unit=frozenset(),
        combine=lambda a, b: frozenset(),
        enumerate_carrier=lambda: (frozenset(),),
        leq=lambda a, b: True,
    )


def index_tokens(index) -> List[str]:
    """Render an index as token strings: sorted for sets, ordered for traces."""
    if isinstance(index, bool):
        return ["t" if index else "f"]
    if isinstance(index, frozenset):
        return sorted(str(token) for token in index)
    if isinstance(index, tuple):
        return [str(item) if isinstance(item, EffectToken) else f"out {item}" for item in index]
    raise TypeError(f"not an index: {index!r}")


def format_index(index) -> str:
    if isinstance(index, bool):
        return "t" if index else "f"
    return "{" + ", ".join(index_tokens(index)) + "}"


def index_from_tokens(alg: EffectAlgebra, tokens: Iterable[str]):
    tokens = list(tokens)
    if alg.name == "bool-conj":
        if tokens not in (["t"], ["f"]):
            raise ValueError(f"not a coeffect annotation: {tokens}")
        return tokens == ["t"]
    return alg.from_tokens(EffectToken.parse(text) for text in tokens)


def commutativity_witness(alg: EffectAlgebra) -> Optional[Tuple[Any, Any]]:
    """A pair a, b with a⊗b ≠ b⊗a, or None when combine commutes."""
    for a, b in itertools.product(alg.carrier, repeat=2):
        try:
            if alg.combine(a, b) != alg.combine(b, a):
                return a, b
        except IndexOverflow:
            continue
    return None


def check_algebra_laws(alg: EffectAlgebra, budget: int = 100000) -> List[LawReport]:
    """Exhaustively check the monoid laws (and order laws when leq exists)."""
    carrier = alg.carrier
    n = len(carrier)
    if n ** 3 > budget:
        raise EnumerationBudgetExceeded(f"{alg.name}: {n}^3 triples exceed budget {budget}")
    sizes = {"carrier": n}
    reports = []

    def combine(a, b):
        try:
            return alg.combine(a, b)
        except IndexOverflow:
            return None

    def run(law, arity, holds, sides=None):
        for inputs in itertools.product(carrier, repeat=arity):
            result = holds(*inputs)
            if result is None or result:
                continue
            lhs, rhs = sides(*inputs) if sides else (False, True)
            logger.info("%s: law %s fails at %s", alg.name, law, inputs)
            return failure(law, alg.name, inputs, lhs, rhs, sizes)
        return LawReport(law, alg.name, Verdict.PASS, dict(sizes))

    def assoc(a, b, c):
        left_inner, right_inner = combine(a, b), combine(b, c)
        if left_inner is None or right_inner is None:
            return None
        lhs, rhs = combine(left_inner, c), combine(a, right_inner)
        if lhs is None or rhs is None:
            return None
        return lhs == rhs

    reports.append(run("associativity", 3, assoc,
                       lambda a, b, c: (combine(combine(a, b), c), combine(a, combine(b, c)))))
    reports.append(run("left-identity", 1, lambda a: alg.combine(alg.unit, a) == a,
                       lambda a: (alg.combine(alg.unit, a), a)))
    reports.append(run("right-identity", 1, lambda a: alg.combine(a, alg.unit) == a,
                       lambda a: (alg.combine(a, alg.unit), a)))

    if alg.leq is not None:
        leq = alg.leq
        reports.append(run("leq-reflexive", 1, lambda a: leq(a, a)))
        reports.append(run("leq-antisymmetric", 2,
                           lambda a, b: not (leq(a, b) and leq(b, a)) or a == b))
        reports.append(run("leq-transitive", 3,
                           lambda a, b, c: not (leq(a, b) and leq(b, c)) or leq(a, c)))
        reports.append(run("unit-least", 1, lambda a: leq(alg.unit, a)))
        reports.append(run("combine-monotone", 3,
                           lambda a, b, c: not leq(a, b) or (leq(combine(a, c), combine(b, c))
                                                             and leq(combine(c, a), combine(c, b)))))
        reports.append(run("combine-is-join", 3,
                           lambda a, b, c: leq(a, combine(a, b)) and leq(b, combine(a, b))
                           and (not (leq(a, c) and leq(b, c)) or leq(combine(a, b), c))))
    return reports
