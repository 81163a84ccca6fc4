# core/mutants.py
"""Deliberately broken instances. The law harness must reject each one."""
from core import values as sv
from core.effect_algebra import TokenKind
from core.indexed_comonad import PartialityComonad
from core.indexed_monad import MemoryMonad, Reader, ReaderMonad, names_of


class SwappedReaderMonad(ReaderMonad):
    """μ feeds the G-part of the environment to the outer computation."""

    name = "reader/swapped-mu"

    def mu(self, outer, inner, t):
        f_names = names_of(outer, TokenKind.PARAM)
        g_names = names_of(inner, TokenKind.PARAM)
        domain = self.env_domain(self.algebra.combine(outer, inner))
        return Reader(domain, lambda x: t(x.restrict(g_names))(x.restrict(f_names)))


class LeftBiasedMemoryMonad(MemoryMonad):
    """The first write to a region wins over later ones."""

    name = "memory/left-biased"

    def merge_writes(self, first, second):
        return second.override(first)


class BrokenDeltaComonad(PartialityComonad):
    """δ(t, t) forgets the context."""

    name = "partiality/broken-delta"

    def delta(self, outer, inner, d):
        self.check_shape(self.algebra.combine(outer, inner), d)
        return sv.ABSENT


class DisjunctiveZipComonad(PartialityComonad):
    """mzip indexed by ∨ = or, which claims a full pair from half a context."""

    name = "partiality/or-zip"

    def join(self, left, right):
        return left or right


MONAD_MUTANTS = {
    "reader": SwappedReaderMonad,
    "memory": LeftBiasedMemoryMonad,
}

COMONAD_MUTANTS = (BrokenDeltaComonad, DisjunctiveZipComonad)
