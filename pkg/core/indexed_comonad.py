# core/indexed_comonad.py
"""Indexed comonads: colax monoidal functors D, with the partiality instance.

D t A = A and D f A = 1: a context is either available (t) or replaced by
the single value ABSENT (f). `mzip` merges two contexts at index F ∨ G where
∨ is the instance's `join`.
"""
import itertools
import logging
from abc import ABC, abstractmethod
from typing import Callable, Dict, List, Tuple

from core import values as sv
from core.effect_algebra import EffectAlgebra, bool_conj_algebra, format_index
from core.errors import IndexMismatch

logger = logging.getLogger(__name__)


class IndexedComonad(ABC):
    name = "indexed-comonad"

    def __init__(self, algebra: EffectAlgebra):
        self.algebra = algebra

    @abstractmethod
    def carrier_of(self, index, domain: sv.Domain) -> sv.Domain:
        ...

    @abstractmethod
    def join(self, left, right):
        """The associative ∨ used to index mzip results."""

    @abstractmethod
    def fmap(self, index, f: Callable, d):
        ...

    @abstractmethod
    def epsilon(self, d):
        ...

    @abstractmethod
    def delta(self, outer, inner, d):
        ...

    @abstractmethod
    def mzip(self, left, right, d1, d2):
        ...

    def __repr__(self):
        return f"<{type(self).__name__} over {self.algebra.name}>"


class PartialityComonad(IndexedComonad):
    name = "partiality"

    def __init__(self):
        super().__init__(bool_conj_algebra())

    def carrier_of(self, index, domain):
        return domain if index else sv.ONE_POINT

    def join(self, left, right):
        return left and right

    def check_shape(self, index, d):
        if not index and d != sv.ABSENT:
            raise IndexMismatch(f"value {d} supplied at index {format_index(index)}, "
                                f"where only absent is allowed")
        return d

    def fmap(self, index, f, d):
        self.check_shape(index, d)
        return f(d) if index else sv.ABSENT

    def epsilon(self, d):
        return d

    def delta(self, outer, inner, d):
        self.check_shape(self.algebra.combine(outer, inner), d)
        if outer and inner:
            return d
        return sv.ABSENT

    def mzip(self, left, right, d1, d2):
        self.check_shape(left, d1)
        self.check_shape(right, d2)
        if self.join(left, right):
            return sv.Pair(d1, d2)
        return sv.ABSENT


def make_partiality_instance() -> PartialityComonad:
    return PartialityComonad()


def comonad_fmap(inst: IndexedComonad, index, f, d):
    return inst.fmap(index, f, d)


def epsilon(inst: IndexedComonad, d):
    return inst.epsilon(d)


def delta(inst: IndexedComonad, outer, inner, d):
    return inst.delta(outer, inner, d)


def mzip(inst: IndexedComonad, left, right, d1, d2):
    return inst.mzip(left, right, d1, d2)


def derive_mzip_join() -> List[Dict[Tuple[bool, bool], bool]]:
    """Every binary operation on {f, t} that can index a total mzip.

    Candidates must be associative, keep t ∨ t = t, and may only answer t
    when both contexts are present (otherwise A × B would have to be
    fabricated from ABSENT). Exactly conjunction survives.
    """
    keys = list(itertools.product((False, True), repeat=2))
    survivors = []
    for outputs in itertools.product((False, True), repeat=4):
        table = dict(zip(keys, outputs))
        associative = all(table[(table[(a, b)], c)] == table[(a, table[(b, c)])]
                          for a, b, c in itertools.product((False, True), repeat=3))
        total = all(not table[(a, b)] or (a and b) for a, b in keys)
        if associative and total and table[(True, True)]:
            survivors.append(table)
    logger.debug("mzip join candidates surviving: %d of 16", len(survivors))
    return survivors
