# core/indexed_monad.py
"""Indexed monads: lax monoidal functors T from an index algebra to endofunctors.

Each instance bundles the functor action (`fmap`), the unit at the algebra's
unit index (`eta`), the multiplication `mu(F, G, ·) : T F (T G A) → T (F⊗G) A`,
the sub-effecting coercion `iota(X, Y, ·)` for X ⊑ Y, and the strength
`strength(F, a, ·) : A × T F B → T F (A × B)`. Computations are plain Python
objects compared pointwise, so the law harness can quantify over them.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Tuple

from core import values as sv
from core.calculus import Signature, type_domain
from core.effect_algebra import (EffectAlgebra, TokenKind, format_index, powerset_algebra,
                                 trace_algebra, trivial_algebra)
from core.errors import (AlgebraMismatch, IndexMismatch, NoLatticeError,
                         UnsupportedPrimitive)

logger = logging.getLogger(__name__)

INSTANCE_NAMES = ("reader", "memory", "trace", "identity")


def names_of(index, kind: TokenKind) -> frozenset:
    return frozenset(token.name for token in index if token.kind is kind)


def _tabulate(computation, domain: sv.Domain, limit: int = 16) -> str:
    if domain.size() > limit:
        return repr(computation)
    rows = []
    for key in domain.elements():
        result = computation(key)
        if isinstance(result, tuple):
            result = f"({result[0]}, {result[1]})"
        rows.append(f"{key} ↦ {result}")
    return "[" + "; ".join(rows) + "]"


class IndexedMonad(ABC):
    name = "indexed-monad"

    def __init__(self, sig: Signature, algebra: EffectAlgebra):
        self.sig = sig
        self.algebra = algebra

    @abstractmethod
    def carrier_of(self, index, domain: sv.Domain) -> sv.Domain:
        """Domain of T index A for a value domain A."""

    def precise_carrier(self, index, domain: sv.Domain) -> sv.Domain:
        return self.carrier_of(index, domain)

    @abstractmethod
    def fmap(self, index, f: Callable[[Any], Any], t):
        ...

    @abstractmethod
    def eta(self, a):
        ...

    @abstractmethod
    def mu(self, outer, inner, t):
        ...

    @abstractmethod
    def iota(self, source, target, t):
        ...

    @abstractmethod
    def strength(self, index, a, t):
        ...

    @abstractmethod
    def execute(self, index, t, env: sv.Env, store: sv.Env) -> Tuple[Any, sv.Env, tuple]:
        """Run a computation: (value, performed writes, emitted trace)."""

    def ask(self, param: str):
        raise UnsupportedPrimitive(f"primitive not supported by instance {self.name}: ask {param}")

    def read(self, region: str):
        raise UnsupportedPrimitive(f"primitive not supported by instance {self.name}: read {region}")

    def write(self, region: str, value):
        raise UnsupportedPrimitive(f"primitive not supported by instance {self.name}: write {region}")

    def out(self, tag: str, value):
        raise UnsupportedPrimitive(f"primitive not supported by instance {self.name}: out {tag}")

    def _require_below(self, source, target):
        if not self.algebra.below(source, target):
            raise IndexMismatch(f"cannot coerce {format_index(source)} to {format_index(target)}")

    def __repr__(self):
        return f"<{type(self).__name__} over {self.algebra.name}>"


# ---------- Reader: T X A = X ⇒ A ----------

class Reader:
    """A computation reading the implicit parameters named by its domain."""

    __hash__ = None

    def __init__(self, domain: sv.EnvDomain, run: Callable[[sv.Env], Any]):
        self.domain = domain
        self.run = run

    def __call__(self, env: sv.Env):
        env.require(self.domain.names, "reader environment")
        return self.run(env)

    def __eq__(self, other):
        if not isinstance(other, Reader):
            return NotImplemented
        if self.domain != other.domain:
            return False
        return all(self(env) == other(env) for env in self.domain.elements())

    def __repr__(self):
        return f"<reader {self.domain.label()}>"

    def __str__(self):
        return _tabulate(self, self.domain)


class ReaderMonad(IndexedMonad):
    """Implicit parameters indexed by the set of parameters a computation needs."""

    name = "reader"

    def __init__(self, sig: Signature, algebra: EffectAlgebra = None):
        tokens = [token for token in sig.tokens() if token.kind is TokenKind.PARAM]
        super().__init__(sig, algebra or powerset_algebra(tokens, name="reader"))

    def env_domain(self, index) -> sv.EnvDomain:
        return sv.EnvDomain.of({name: type_domain(self.sig.param_type(name))
                                for name in names_of(index, TokenKind.PARAM)})

    def carrier_of(self, index, domain):
        env_domain = self.env_domain(index)
        return sv.FunctionSpace(env_domain, domain, lambda table: Reader(env_domain, table), "⇒reader")

    def fmap(self, index, f, t):
        return Reader(t.domain, lambda env: f(t(env)))

    def eta(self, a):
        return Reader(sv.EnvDomain(), lambda env: a)

    def mu(self, outer, inner, t):
        f_names = names_of(outer, TokenKind.PARAM)
        g_names = names_of(inner, TokenKind.PARAM)
        domain = self.env_domain(self.algebra.combine(outer, inner))

        def run(x: sv.Env):
            # k (x − (G − F)) (x − (F − G))
            only_f = x.restrict(x.names - (g_names - f_names))
            only_g = x.restrict(x.names - (f_names - g_names))
            return t(only_f)(only_g)

        return Reader(domain, run)

    def iota(self, source, target, t):
        self._require_below(source, target)
        keep = names_of(source, TokenKind.PARAM)
        return Reader(self.env_domain(target), lambda y: t(y.restrict(keep)))

    def strength(self, index, a, t):
        return Reader(t.domain, lambda env: sv.Pair(a, t(env)))

    def ask(self, param):
        domain = self.env_domain([token for token in self.algebra.generators if token.name == param])
        return Reader(domain, lambda env: env[param])

    def execute(self, index, t, env, store):
        return t(env), sv.EMPTY_ENV, ()


def make_reader_instance(sig: Signature, alg: EffectAlgebra = None) -> ReaderMonad:
    if alg is not None and any(token.kind is not TokenKind.PARAM for token in alg.generators):
        raise AlgebraMismatch("the reader instance needs an algebra over implicit parameters")
    return ReaderMonad(sig, alg)


# ---------- Memory: reads as inputs, performed writes as outputs ----------

class Memory:
    """A computation over a store restricted to its read regions.

    `run` returns (value, performed writes); performed writes form a partial
    map whose domain is within the declared write regions.
    """

    __hash__ = None

    def __init__(self, reads: sv.EnvDomain, writes: frozenset, run: Callable[[sv.Env], Tuple[Any, sv.Env]]):
        self.reads = reads
        self.writes = frozenset(writes)
        self.run = run

    def __call__(self, store: sv.Env):
        store.require(self.reads.names, "store")
        value, performed = self.run(store)
        if not performed.names <= self.writes:
            raise IndexMismatch(f"computation wrote {sorted(performed.names)} but may only write "
                                f"{sorted(self.writes)}")
        return value, performed

    def __eq__(self, other):
        if not isinstance(other, Memory):
            return NotImplemented
        if self.reads != other.reads or self.writes != other.writes:
            return False
        return all(self(store) == other(store) for store in self.reads.elements())

    def __repr__(self):
        return f"<memory reads {sorted(self.reads.names)} writes {sorted(self.writes)}>"

    def __str__(self):
        return _tabulate(self, self.reads)


def _unpair(pair: sv.Pair) -> Tuple[Any, sv.Env]:
    return pair.fst, pair.snd


class MemoryMonad(IndexedMonad):
    """Read/write effects on named regions, sequenced like global state."""

    name = "memory"

    def __init__(self, sig: Signature, algebra: EffectAlgebra = None):
        tokens = [token for token in sig.tokens() if token.kind in (TokenKind.READ, TokenKind.WRITE)]
        super().__init__(sig, algebra or powerset_algebra(tokens, name="memory"))

    def _regions(self, names) -> dict:
        return {name: type_domain(self.sig.region_type(name)) for name in names}

    def reads_domain(self, index) -> sv.EnvDomain:
        return sv.EnvDomain.of(self._regions(names_of(index, TokenKind.READ)))

    def carrier_of(self, index, domain):
        reads = self.reads_domain(index)
        writes = names_of(index, TokenKind.WRITE)
        outputs = sv.ProductDomain(domain, sv.PartialEnvDomain.of(self._regions(writes)))
        return sv.FunctionSpace(reads, outputs,
                                lambda table: Memory(reads, writes, lambda s: _unpair(table(s))),
                                "⇒memory")

    def precise_carrier(self, index, domain):
        """Only computations that perform every declared write (T{wr ρ:τ} A = A × τ)."""
        reads = self.reads_domain(index)
        writes = names_of(index, TokenKind.WRITE)
        outputs = sv.ProductDomain(domain, sv.EnvDomain.of(self._regions(writes)))
        return sv.FunctionSpace(reads, outputs,
                                lambda table: Memory(reads, writes, lambda s: _unpair(table(s))),
                                "⇒memory!")

    def fmap(self, index, f, t):
        def run(store):
            value, performed = t(store)
            return f(value), performed
        return Memory(t.reads, t.writes, run)

    def eta(self, a):
        return Memory(sv.EnvDomain(), frozenset(), lambda store: (a, sv.EMPTY_ENV))

    def merge_writes(self, first: sv.Env, second: sv.Env) -> sv.Env:
        # later write wins
        return first.override(second)

    def mu(self, outer, inner, t):
        combined = self.algebra.combine(outer, inner)
        f_reads = names_of(outer, TokenKind.READ)
        g_reads = names_of(inner, TokenKind.READ)

        def run(store):
            k, first = t(store.restrict(f_reads))
            visible = store.restrict(g_reads).override(first.restrict(g_reads))
            value, second = k(visible)
            return value, self.merge_writes(first, second)

        return Memory(self.reads_domain(combined), names_of(combined, TokenKind.WRITE), run)

    def iota(self, source, target, t):
        self._require_below(source, target)
        keep = names_of(source, TokenKind.READ)
        return Memory(self.reads_domain(target), names_of(target, TokenKind.WRITE),
                      lambda store: t(store.restrict(keep)))

    def strength(self, index, a, t):
        def run(store):
            value, performed = t(store)
            return sv.Pair(a, value), performed
        return Memory(t.reads, t.writes, run)

    def read(self, region):
        reads = sv.EnvDomain.of(self._regions([region]))
        return Memory(reads, frozenset(), lambda store: (store[region], sv.EMPTY_ENV))

    def write(self, region, value):
        self.sig.region_type(region)
        return Memory(sv.EnvDomain(), frozenset([region]),
                      lambda store: (sv.UNIT, sv.Env.of({region: value})))

    def execute(self, index, t, env, store):
        value, performed = t(store.restrict(names_of(index, TokenKind.READ)))
        return value, performed, ()


def make_memory_instance(sig: Signature, alg: EffectAlgebra = None) -> MemoryMonad:
    if alg is not None and any(token.kind not in (TokenKind.READ, TokenKind.WRITE)
                               for token in alg.generators):
        raise AlgebraMismatch("the memory instance needs an algebra over read/write tokens")
    return MemoryMonad(sig, alg)


# ---------- Trace: T F A = A × (values emitted at the tags of F, in order) ----------

@dataclass(frozen=True)
class Traced:
    value: Any
    emitted: Tuple[Any, ...] = ()

    def __str__(self):
        return f"⟨{self.value}; {', '.join(str(item) for item in self.emitted)}⟩"


class TraceMonad(IndexedMonad):
    """Ordered output effects; the index records which tags fire and in what order."""

    name = "trace"

    def __init__(self, sig: Signature, max_len: int = 3, algebra: EffectAlgebra = None):
        super().__init__(sig, algebra or trace_algebra([name for name, _ in sig.tags], max_len))

    def carrier_of(self, index, domain):
        emitted = sv.TupleDomain(tuple(type_domain(self.sig.tag_type(tag)) for tag in index))
        return sv.MappedDomain(sv.ProductDomain(domain, emitted),
                               lambda pair: Traced(pair.fst, pair.snd),
                               lambda traced: sv.Pair(traced.value, traced.emitted),
                               "trace")

    def fmap(self, index, f, t):
        return Traced(f(t.value), t.emitted)

    def eta(self, a):
        return Traced(a, ())

    def mu(self, outer, inner, t):
        self.algebra.combine(outer, inner)
        return Traced(t.value.value, tuple(t.emitted) + tuple(t.value.emitted))

    def iota(self, source, target, t):
        if source != target:
            raise NoLatticeError(f"trace indices have no order: {format_index(source)} "
                                 f"to {format_index(target)}")
        return t

    def strength(self, index, a, t):
        return Traced(sv.Pair(a, t.value), t.emitted)

    def out(self, tag, value):
        self.sig.tag_type(tag)
        return Traced(sv.UNIT, (value,))

    def execute(self, index, t, env, store):
        return t.value, sv.EMPTY_ENV, tuple(zip(index, t.emitted))


def make_trace_instance(sig: Signature, alg: EffectAlgebra = None, max_len: int = 3) -> TraceMonad:
    return TraceMonad(sig, max_len, alg)


# ---------- Identity: the collapse at the one-object monoid ----------

class IdentityMonad(IndexedMonad):
    name = "identity"

    def __init__(self, sig: Signature = None):
        super().__init__(sig or Signature(), trivial_algebra())

    def carrier_of(self, index, domain):
        return domain

    def fmap(self, index, f, t):
        return f(t)

    def eta(self, a):
        return a

    def mu(self, outer, inner, t):
        return t

    def iota(self, source, target, t):
        return t

    def strength(self, index, a, t):
        return sv.Pair(a, t)

    def execute(self, index, t, env, store):
        return t, sv.EMPTY_ENV, ()


def identity_collapse_instance() -> IdentityMonad:
    return IdentityMonad()


def build_instance(name: str, sig: Signature, max_len: int = 3) -> IndexedMonad:
    if name == "reader":
        return ReaderMonad(sig)
    if name == "memory":
        return MemoryMonad(sig)
    if name == "trace":
        return TraceMonad(sig, max_len)
    if name == "identity":
        return IdentityMonad(sig)
    raise ValueError(f"unknown instance {name!r}; choose from {', '.join(INSTANCE_NAMES)}")
