# core/values.py
"""Semantic values and the finite domains they are enumerated from.

Everything the semantics computes with lives here: first-order values, the
one-point value used by the comonad side, intensional functions compared
pointwise, environments/stores, and `Domain` objects that know how to count,
enumerate and sample the values of a semantic type.
"""
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Tuple

from config import DEFAULT_CONFIG
from core.errors import EnumerationBudgetExceeded, EnvDomainMismatch

DEFAULT_MODULUS = DEFAULT_CONFIG["modulus"]

# Sizes saturate here; anything at the cap is "too big to enumerate".
SIZE_CAP = 10 ** 18

_function_equality_limit = DEFAULT_CONFIG["semantics"]["function_equality_limit"]


def set_function_equality_limit(limit: int):
    global _function_equality_limit
    _function_equality_limit = int(limit)


def function_equality_limit() -> int:
    return _function_equality_limit


class SemValue:
    """Marker base for values of the semantic universe."""


@dataclass(frozen=True)
class Unit(SemValue):
    def __str__(self):
        return "unit"


@dataclass(frozen=True)
class Bool(SemValue):
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class IntMod(SemValue):
    k: int
    m: int = DEFAULT_MODULUS

    def __post_init__(self):
        if not 0 <= self.k < self.m:
            raise ValueError(f"IntMod({self.k}, {self.m}) is not reduced")

    def __str__(self):
        return str(self.k)


@dataclass(frozen=True)
class Pair(SemValue):
    fst: Any
    snd: Any

    def __str__(self):
        return f"({self.fst}, {self.snd})"


@dataclass(frozen=True)
class Absent(SemValue):
    """The single inhabitant of the one-point object."""

    def __str__(self):
        return "absent"


class Fun(SemValue):
    """An intensional function, total on `domain`, compared pointwise."""

    __hash__ = None

    def __init__(self, domain: "Domain", fn: Callable[[Any], Any]):
        self.domain = domain
        self.fn = fn

    def __call__(self, arg):
        return self.fn(arg)

    def __eq__(self, other):
        if not isinstance(other, Fun):
            return NotImplemented
        if self.domain != other.domain:
            return False
        if self.domain.size() > _function_equality_limit:
            raise EnumerationBudgetExceeded(
                f"function domain {self.domain.label()} exceeds the equality limit "
                f"of {_function_equality_limit}")
        return all(self.fn(x) == other.fn(x) for x in self.domain.elements())

    def __repr__(self):
        return f"<fun on {self.domain.label()}>"

    __str__ = __repr__


UNIT = Unit()
TRUE = Bool(True)
FALSE = Bool(False)
ABSENT = Absent()


def int_mod(k: int, m: int = DEFAULT_MODULUS) -> IntMod:
    return IntMod(k % m, m)


def successor(value: IntMod) -> IntMod:
    return int_mod(value.k + 1, value.m)


@dataclass(frozen=True)
class Env:
    """A finite map from names to values, kept sorted by name."""

    items: Tuple[Tuple[str, Any], ...] = ()

    @classmethod
    def of(cls, mapping: Optional[Dict[str, Any]] = None) -> "Env":
        mapping = mapping or {}
        return cls(tuple(sorted(mapping.items(), key=lambda item: item[0])))

    @property
    def names(self) -> frozenset:
        return frozenset(name for name, _ in self.items)

    def __getitem__(self, name: str):
        for key, value in self.items:
            if key == name:
                return value
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(key == name for key, _ in self.items)

    def __len__(self):
        return len(self.items)

    def get(self, name: str, default=None):
        return self[name] if name in self else default

    def as_dict(self) -> Dict[str, Any]:
        return dict(self.items)

    def restrict(self, names: Iterable[str]) -> "Env":
        keep = frozenset(names)
        return Env(tuple(item for item in self.items if item[0] in keep))

    def override(self, other: "Env") -> "Env":
        merged = self.as_dict()
        merged.update(other.as_dict())
        return Env.of(merged)

    def extend(self, name: str, value) -> "Env":
        merged = self.as_dict()
        merged[name] = value
        return Env.of(merged)

    def require(self, names: Iterable[str], what: str = "environment") -> "Env":
        expected = frozenset(names)
        if self.names != expected:
            raise EnvDomainMismatch(
                f"{what} has domain {sorted(self.names)}, index demands {sorted(expected)}")
        return self

    def __str__(self):
        inner = ", ".join(f"{name}↦{value}" for name, value in self.items)
        return "{" + inner + "}"


EMPTY_ENV = Env()


def _capped_product(sizes: Iterable[int]) -> int:
    total = 1
    for size in sizes:
        total = min(total * size, SIZE_CAP)
    return total


def _capped_power(base: int, exponent: int) -> int:
    if base <= 1 or exponent == 0:
        return 1 if exponent == 0 else base
    total = 1
    for _ in range(exponent):
        total *= base
        if total >= SIZE_CAP:
            return SIZE_CAP
    return total


class Domain:
    """A finite semantic type: countable, enumerable and samplable."""

    def size(self) -> int:
        raise NotImplementedError

    def elements(self) -> Iterator[Any]:
        raise NotImplementedError

    def sample(self, rng) -> Any:
        raise NotImplementedError

    def contains(self, value) -> bool:
        raise NotImplementedError

    def label(self) -> str:
        return type(self).__name__

    def materialize(self, limit: int) -> List[Any]:
        if self.size() > limit:
            raise EnumerationBudgetExceeded(f"{self.label()} has more than {limit} elements")
        return list(self.elements())


@dataclass(frozen=True)
class FiniteDomain(Domain):
    name: str
    values: Tuple[Any, ...]

    def size(self):
        return len(self.values)

    def elements(self):
        return iter(self.values)

    def sample(self, rng):
        return rng.choice(self.values)

    def contains(self, value):
        return any(value == candidate for candidate in self.values)

    def label(self):
        return self.name


UNIT_DOMAIN = FiniteDomain("unit", (UNIT,))
BOOL_DOMAIN = FiniteDomain("bool", (FALSE, TRUE))
ONE_POINT = FiniteDomain("1", (ABSENT,))


def int_mod_domain(m: int = DEFAULT_MODULUS) -> FiniteDomain:
    return FiniteDomain(f"int{m}", tuple(IntMod(k, m) for k in range(m)))


def base_domain(base: str) -> FiniteDomain:
    """Domain of a base type name as written in signatures."""
    if base == "unit":
        return UNIT_DOMAIN
    if base == "bool":
        return BOOL_DOMAIN
    if base.startswith("int"):
        return int_mod_domain(int(base[3:]))
    raise ValueError(f"unknown base type {base!r}")


@dataclass(frozen=True)
class ProductDomain(Domain):
    left: Domain
    right: Domain

    def size(self):
        return _capped_product([self.left.size(), self.right.size()])

    def elements(self):
        rights = list(self.right.elements())
        for a in self.left.elements():
            for b in rights:
                yield Pair(a, b)

    def sample(self, rng):
        return Pair(self.left.sample(rng), self.right.sample(rng))

    def contains(self, value):
        return (isinstance(value, Pair) and self.left.contains(value.fst)
                and self.right.contains(value.snd))

    def label(self):
        return f"({self.left.label()} × {self.right.label()})"


@dataclass(frozen=True)
class EnvDomain(Domain):
    """Total environments over a fixed set of names."""

    fields: Tuple[Tuple[str, Domain], ...] = ()

    @classmethod
    def of(cls, mapping: Dict[str, Domain]) -> "EnvDomain":
        return cls(tuple(sorted(mapping.items(), key=lambda item: item[0])))

    @property
    def names(self) -> frozenset:
        return frozenset(name for name, _ in self.fields)

    def restrict(self, names: Iterable[str]) -> "EnvDomain":
        keep = frozenset(names)
        return EnvDomain(tuple(item for item in self.fields if item[0] in keep))

    def size(self):
        return _capped_product(domain.size() for _, domain in self.fields)

    def elements(self):
        names = [name for name, _ in self.fields]
        pools = [list(domain.elements()) for _, domain in self.fields]
        for combo in itertools.product(*pools):
            yield Env(tuple(zip(names, combo)))

    def sample(self, rng):
        return Env(tuple((name, domain.sample(rng)) for name, domain in self.fields))

    def contains(self, value):
        return (isinstance(value, Env) and value.names == self.names
                and all(domain.contains(value[name]) for name, domain in self.fields))

    def label(self):
        return "{" + ", ".join(f"{name}:{domain.label()}" for name, domain in self.fields) + "}"


@dataclass(frozen=True)
class PartialEnvDomain(Domain):
    """Environments defined on any subset of the given names."""

    fields: Tuple[Tuple[str, Domain], ...] = ()

    @classmethod
    def of(cls, mapping: Dict[str, Domain]) -> "PartialEnvDomain":
        return cls(tuple(sorted(mapping.items(), key=lambda item: item[0])))

    @property
    def names(self) -> frozenset:
        return frozenset(name for name, _ in self.fields)

    def size(self):
        return _capped_product(domain.size() + 1 for _, domain in self.fields)

    def elements(self):
        names = [name for name, _ in self.fields]
        pools = [[None] + list(domain.elements()) for _, domain in self.fields]
        for combo in itertools.product(*pools):
            yield Env(tuple((name, value) for name, value in zip(names, combo) if value is not None))

    def sample(self, rng):
        chosen = []
        for name, domain in self.fields:
            if rng.random() < 1.0 / (domain.size() + 1):
                continue
            chosen.append((name, domain.sample(rng)))
        return Env(tuple(chosen))

    def contains(self, value):
        if not isinstance(value, Env) or not value.names <= self.names:
            return False
        lookup = dict(self.fields)
        return all(lookup[name].contains(item) for name, item in value.items)

    def label(self):
        return "{" + ", ".join(f"{name}?:{domain.label()}" for name, domain in self.fields) + "}"


@dataclass(frozen=True)
class TupleDomain(Domain):
    parts: Tuple[Domain, ...] = ()

    def size(self):
        return _capped_product(part.size() for part in self.parts)

    def elements(self):
        return itertools.product(*[list(part.elements()) for part in self.parts])

    def sample(self, rng):
        return tuple(part.sample(rng) for part in self.parts)

    def contains(self, value):
        return (isinstance(value, tuple) and len(value) == len(self.parts)
                and all(part.contains(item) for part, item in zip(self.parts, value)))

    def label(self):
        return "⟨" + ", ".join(part.label() for part in self.parts) + "⟩"


class Lookup:
    """A tabulated function; falls back to linear search for unhashable keys."""

    def __init__(self, keys: List[Any], values: List[Any]):
        self.keys = list(keys)
        self.values = list(values)
        try:
            self.table = dict(zip(self.keys, self.values))
        except TypeError:
            self.table = None

    def __call__(self, key):
        if self.table is not None:
            try:
                return self.table[key]
            except KeyError:
                pass
            except TypeError:
                return self._scan(key)
            raise EnvDomainMismatch(f"{key} is outside the tabulated domain")
        return self._scan(key)

    def _scan(self, key):
        for candidate, value in zip(self.keys, self.values):
            if candidate == key:
                return value
        raise EnvDomainMismatch(f"{key} is outside the tabulated domain")


@dataclass(frozen=True)
class FunctionSpace(Domain):
    """All total functions dom -> cod, each wrapped by `build`."""

    dom: Domain
    cod: Domain
    build: Callable[[Lookup], Any] = field(compare=False, hash=False)
    name: str = "→"

    def size(self):
        return _capped_power(self.cod.size(), self.dom.size())

    def elements(self):
        keys = list(self.dom.elements())
        values = list(self.cod.elements())
        for combo in itertools.product(values, repeat=len(keys)):
            yield self.build(Lookup(keys, list(combo)))

    def sample(self, rng):
        keys = list(self.dom.elements())
        return self.build(Lookup(keys, [self.cod.sample(rng) for _ in keys]))

    def contains(self, value):
        return callable(value) or hasattr(value, "run")

    def label(self):
        return f"({self.dom.label()} {self.name} {self.cod.label()})"


@dataclass(frozen=True)
class MappedDomain(Domain):
    """`base` viewed through a bijective wrapper (e.g. pairs as traced values)."""

    base: Domain
    wrap: Callable[[Any], Any] = field(compare=False, hash=False)
    unwrap: Callable[[Any], Any] = field(compare=False, hash=False)
    name: str = "mapped"

    def size(self):
        return self.base.size()

    def elements(self):
        return (self.wrap(item) for item in self.base.elements())

    def sample(self, rng):
        return self.wrap(self.base.sample(rng))

    def contains(self, value):
        try:
            return self.base.contains(self.unwrap(value))
        except (AttributeError, TypeError):
            return False

    def label(self):
        return f"{self.name}{self.base.label()}"


def fun_domain(dom: Domain, cod: Domain) -> FunctionSpace:
    return FunctionSpace(dom, cod, lambda table: Fun(dom, table), "⇒")
