import pytest

from core import values as sv
from core.errors import IndexMismatch
from core.indexed_comonad import (PartialityComonad, comonad_fmap, delta, derive_mzip_join, epsilon,
                                  make_partiality_instance, mzip)
from core.law_harness import check_indexed_comonad_laws
from core.mutants import BrokenDeltaComonad, DisjunctiveZipComonad
from core.reports import Verdict


@pytest.fixture
def partiality():
    return make_partiality_instance()


def test_carrier_shapes(partiality):
    assert partiality.carrier_of(True, sv.BOOL_DOMAIN).size() == 2
    assert partiality.carrier_of(False, sv.BOOL_DOMAIN) == sv.ONE_POINT


def test_only_absent_at_f(partiality):
    assert partiality.check_shape(False, sv.ABSENT) == sv.ABSENT
    assert partiality.check_shape(True, sv.ABSENT) == sv.ABSENT
    with pytest.raises(IndexMismatch):
        partiality.check_shape(False, sv.TRUE)


def test_fmap_skips_absent_context(partiality):
    def boom(_):
        raise AssertionError("must not run")

    assert comonad_fmap(partiality, False, boom, sv.ABSENT) == sv.ABSENT
    assert comonad_fmap(partiality, True, lambda b: sv.Bool(not b.value), sv.TRUE) == sv.FALSE


def test_delta_keeps_context_only_when_both_needed(partiality):
    assert delta(partiality, True, True, sv.TRUE) == sv.TRUE
    assert delta(partiality, False, True, sv.ABSENT) == sv.ABSENT
    assert delta(partiality, True, False, sv.ABSENT) == sv.ABSENT
    with pytest.raises(IndexMismatch):
        delta(partiality, True, False, sv.TRUE)
    assert epsilon(partiality, sv.TRUE) == sv.TRUE


def test_mzip_pairs_only_full_contexts(partiality):
    assert mzip(partiality, True, True, sv.TRUE, sv.FALSE) == sv.Pair(sv.TRUE, sv.FALSE)
    assert mzip(partiality, True, False, sv.TRUE, sv.ABSENT) == sv.ABSENT
    assert mzip(partiality, False, False, sv.ABSENT, sv.ABSENT) == sv.ABSENT


def test_join_is_conjunction(partiality):
    assert [partiality.join(a, b) for a in (False, True) for b in (False, True)] == \
        [False, False, False, True]


def test_comonad_laws_hold(partiality):
    reports = check_indexed_comonad_laws(partiality)
    assert {r.law for r in reports} == {"counit-right", "counit-left", "coassociativity",
                                        "mzip-associativity", "mzip-naturality", "mzip-typing"}
    assert all(r.verdict is Verdict.PASS for r in reports), [r.to_json() for r in reports]


def test_comonad_laws_on_int_values(partiality):
    reports = check_indexed_comonad_laws(partiality, value_domain=sv.int_mod_domain())
    assert all(r.ok for r in reports)


def test_only_conjunction_indexes_mzip():
    survivors = derive_mzip_join()
    assert survivors == [{(False, False): False, (False, True): False,
                          (True, False): False, (True, True): True}]


def test_broken_delta_fails_counit():
    reports = {r.law: r for r in check_indexed_comonad_laws(BrokenDeltaComonad())}
    assert reports["counit-right"].verdict is Verdict.FAIL
    assert reports["counit-right"].counterexample["inputs"][0] == "t"


def test_disjunctive_zip_is_rejected():
    inst = DisjunctiveZipComonad()
    assert isinstance(inst, PartialityComonad)
    reports = check_indexed_comonad_laws(inst)
    assert any(r.required and r.verdict is Verdict.FAIL for r in reports)
    typing = next(r for r in reports if r.law == "mzip-typing")
    assert typing.verdict is Verdict.FAIL
