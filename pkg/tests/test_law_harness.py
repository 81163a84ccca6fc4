import copy

import pytest

from config import DEFAULT_CONFIG
from core import calculus as lc
from core import values as sv
from core.effect_algebra import implicit_param, write_token
from core.errors import EnumerationBudgetExceeded, IndexMismatch
from core.indexed_monad import IdentityMonad, MemoryMonad, ReaderMonad, TraceMonad
from core.law_harness import (LAW_INSTANCES, LawRunner, check_fiber_not_monad,
                              check_indexed_monad_laws, check_mzip_join_derivation,
                              check_partiality_has_no_counit, check_shape_relaxation,
                              run_law_suite, suite_passed)
from core.indexed_comonad import make_partiality_instance
from core.mutants import LeftBiasedMemoryMonad, SwappedReaderMonad
from core.reports import LawReport, Verdict


def small_config():
    config = copy.deepcopy(DEFAULT_CONFIG)
    config["laws"]["signature"] = {"params": {"p": "bool"}, "regions": {"r": "bool"},
                                   "tags": {"a": "unit"}}
    config["laws"]["samples"] = 8
    config["trace"]["max_len"] = 2
    return config


# ---------- runner ----------

def test_runner_exhaustive_pass():
    runner = LawRunner("demo")
    report = runner.check("double-negation", [((), sv.BOOL_DOMAIN)],
                          lambda b: (sv.Bool(not (not b.value)), b))
    assert report.verdict is Verdict.PASS
    assert report.domain_sizes == {"cases": 1, "checked": 2}


def test_runner_samples_large_cases():
    runner = LawRunner("demo", budget=3, samples=5)
    report = runner.check("identity", [((), sv.int_mod_domain(8))], lambda k: (k, k))
    assert report.verdict is Verdict.SAMPLED_PASS
    assert report.domain_sizes["checked"] == 5


def test_runner_reports_counterexample():
    runner = LawRunner("demo")
    report = runner.check("constant", [((True,), sv.BOOL_DOMAIN)], lambda flag, b: (b, sv.TRUE))
    assert report.verdict is Verdict.FAIL
    assert report.counterexample == {"inputs": ["t", "false"], "lhs": "false", "rhs": "true"}
    assert report.witness == ("t", sv.FALSE)


def test_runner_turns_errors_into_failures():
    def holds(b):
        raise IndexMismatch("bad index")

    report = LawRunner("demo").check("raises", [((), sv.BOOL_DOMAIN)], holds)
    assert report.verdict is Verdict.FAIL
    assert report.counterexample["lhs"] == "index-mismatch: bad index"
    assert report.note == "raised while evaluating the law"


def test_runner_budget_exceeded():
    def holds(b):
        raise EnumerationBudgetExceeded("too many")

    report = LawRunner("demo").check("big", [((), sv.BOOL_DOMAIN)], holds)
    assert report.verdict is Verdict.BUDGET_EXCEEDED
    assert not report.ok


# ---------- monad laws ----------

@pytest.mark.parametrize("make", [
    lambda: ReaderMonad(lc.Signature.of(params={"p": "bool"})),
    lambda: MemoryMonad(lc.Signature.of(regions={"r": "bool"})),
    lambda: TraceMonad(lc.Signature.of(tags={"a": "unit", "b": "bool"}), max_len=2),
    lambda: IdentityMonad(),
], ids=["reader", "memory", "trace", "identity"])
def test_monad_laws_hold(make):
    inst = make()
    reports = check_indexed_monad_laws(inst, budget=20000, samples=8, value_domain=sv.BOOL_DOMAIN)
    failed = [r.to_json() for r in reports if r.required and not r.ok]
    assert not failed
    assert {"left-unit", "right-unit", "associativity"} <= {r.law for r in reports}


@pytest.mark.parametrize("make", [
    lambda: ReaderMonad(lc.Signature.of(params={"p": "int4"})),
    lambda: MemoryMonad(lc.Signature.of(regions={"r": "int4"})),
    lambda: TraceMonad(lc.Signature.of(tags={"a": "unit", "b": "bool"}), max_len=3),
], ids=["reader", "memory", "trace"])
def test_monad_laws_on_int_values(make):
    reports = check_indexed_monad_laws(make(), budget=20000, samples=8)
    assert all(r.ok for r in reports if r.required), [r.to_json() for r in reports if not r.ok]


def test_reader_laws_over_two_int_parameters():
    inst = ReaderMonad(lc.Signature.of(params={"p": "int4", "q": "int4"}))
    reports = check_indexed_monad_laws(inst, budget=20000, samples=8)
    required = [r for r in reports if r.required]
    assert all(r.ok for r in required), [r.to_json() for r in required if not r.ok]
    assert {"associativity", "iota-composition", "iota-naturality", "strength-mu"} <= {r.law for r in reports}
    assert len(inst.algebra.carrier) == 4


def test_order_laws_skipped_for_trace():
    inst = TraceMonad(lc.Signature.of(tags={"a": "unit"}), max_len=2)
    laws = {r.law for r in check_indexed_monad_laws(inst, budget=5000, value_domain=sv.BOOL_DOMAIN)}
    assert "iota-identity" in laws
    assert "iota-composition" not in laws


def test_memory_checks_global_state_sequencing():
    inst = MemoryMonad(lc.Signature.of(regions={"r": "bool"}))
    reports = {r.law: r for r in check_indexed_monad_laws(inst, budget=20000, samples=8,
                                                          value_domain=sv.BOOL_DOMAIN)}
    assert reports["sequencing-global-state"].ok


def test_swapped_reader_is_rejected():
    inst = SwappedReaderMonad(lc.Signature.of(params={"p": "bool", "q": "bool"}))
    reports = check_indexed_monad_laws(inst, budget=20000, samples=8, value_domain=sv.BOOL_DOMAIN)
    assert any(r.required and r.verdict is Verdict.FAIL for r in reports)


def test_left_biased_memory_is_rejected(memory_sig):
    inst = LeftBiasedMemoryMonad(memory_sig)
    reports = {r.law: r for r in check_indexed_monad_laws(inst, budget=10000, samples=8)}
    sequencing = reports["sequencing-global-state"]
    assert sequencing.verdict is Verdict.FAIL
    outer, inner = sequencing.counterexample["inputs"][:2]
    assert "wr r" in outer and "wr r" in inner


# ---------- structure searches ----------

def test_memory_fiber_has_no_unit(memory_sig):
    inst = MemoryMonad(memory_sig)
    report = check_fiber_not_monad(inst, frozenset([write_token("r")]))
    assert report.verdict is Verdict.NO_STRUCTURE
    assert report.domain_sizes["carrier"] == 8
    assert not report.required


def test_reader_fiber_has_right_unit(reader_sig):
    inst = ReaderMonad(reader_sig)
    report = check_fiber_not_monad(inst, frozenset([implicit_param("p")]))
    assert report.verdict is Verdict.STRUCTURE_FOUND
    assert "left unit not searched" in report.note


def test_trace_fiber_is_inapplicable(trace_sig):
    report = check_fiber_not_monad(TraceMonad(trace_sig), ("a",))
    assert report.verdict is Verdict.INAPPLICABLE


def test_fiber_search_respects_budget(memory_sig):
    report = check_fiber_not_monad(MemoryMonad(memory_sig), frozenset([write_token("r")]), budget=10)
    assert report.verdict is Verdict.BUDGET_EXCEEDED


def test_partiality_structure_checks():
    assert check_partiality_has_no_counit().verdict is Verdict.NO_STRUCTURE
    assert check_shape_relaxation(make_partiality_instance()).verdict is Verdict.PASS
    derivation = check_mzip_join_derivation()
    assert derivation.verdict is Verdict.PASS
    assert derivation.note == "∨ = ∧"


# ---------- suites ----------

def test_suite_is_deterministic_and_ordered():
    config = small_config()
    first = run_law_suite(("partiality", "identity"), config=config, budget=20000)
    second = run_law_suite(("partiality", "identity"), config=config, budget=20000)
    assert [r.to_json() for r in first] == [r.to_json() for r in second]
    assert first[0].instance == "partiality"
    assert suite_passed(first)


def test_suite_with_mutants_reports_each_rejection():
    config = small_config()
    reports = run_law_suite(("partiality",), config=config, budget=20000, mutants=True)
    rejected = {r.instance: r for r in reports if r.law == "mutant-rejected"}
    assert set(rejected) == {"partiality/broken-delta", "partiality/or-zip"}
    assert all(r.verdict is Verdict.PASS for r in rejected.values())
    assert all(r.counterexample is not None for r in rejected.values())
    assert rejected["partiality/broken-delta"].note == "caught by counit-right"
    assert suite_passed(reports)


def test_suite_passed_ignores_optional_reports():
    optional = LawReport("fiber-monad {wr r}", "memory", Verdict.NO_STRUCTURE, required=False)
    broken = LawReport("left-unit", "memory", Verdict.FAIL)
    assert suite_passed([optional])
    assert not suite_passed([optional, broken])


def test_law_instances():
    assert LAW_INSTANCES == ("reader", "memory", "trace", "identity", "partiality")
