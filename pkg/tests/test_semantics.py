import itertools

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from core import calculus as lc
from core import values as sv
from core.coeffect_inference import erase_effect_latents, infer_coeffect
from core.effect_algebra import TokenKind, lattice_algebra
from core.effect_inference import check_against_annotation, infer_effect
from core.errors import AlgebraMismatch, DerivationError, InputMismatch
from core.generator import beta_redexes, dead_lets, generator_signature, programs
from core.indexed_comonad import make_partiality_instance
from core.indexed_monad import build_instance, names_of
from core.law_harness import global_state_oracle
from core.semantics import (denote_effect, eval_program, run_coeffect, select_instance_name,
                            value_domain)

INSTANCES = ["reader", "memory", "trace", "identity"]
PROPERTY = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def all_inputs(sig, effect):
    """Every env over the parameters in `effect`, paired with every store."""
    params = names_of(effect, TokenKind.PARAM) if isinstance(effect, frozenset) else frozenset()
    env_items = [(name, t) for name, t in sig.params if name in params]
    store_items = list(sig.regions)
    domains = [lc.type_domain(t).elements() for _, t in env_items + store_items]
    for values in itertools.product(*domains):
        env = sv.Env.of({name: v for (name, _), v in zip(env_items, values)})
        store = sv.Env.of({name: v for (name, _), v in zip(store_items, values[len(env_items):])})
        yield {"env": env, "store": store}


def effect_of(instance, sig, term):
    return infer_effect(sig, build_instance(instance, sig).algebra, {}, term).effect


# ---------- properties ----------

@pytest.mark.parametrize("instance", INSTANCES)
@PROPERTY
@given(data=st.data())
def test_denotation_index_matches_inferred_effect(instance, data):
    sig = generator_signature(instance)
    term = data.draw(programs(instance))
    inst = build_instance(instance, sig)
    j = infer_effect(sig, inst.algebra, {}, term)
    den = denote_effect(inst, j)
    assert den.index == j.effect
    for inputs in all_inputs(sig, j.effect):
        value, _, _ = inst.execute(den.index, den(sv.EMPTY_ENV), inputs["env"], inputs["store"])
        assert value_domain(inst, j.type).contains(value)


@pytest.mark.parametrize("instance", INSTANCES)
@PROPERTY
@given(data=st.data())
def test_beta_value(instance, data):
    sig = generator_signature(instance)
    redex, reduced = data.draw(beta_redexes(instance))
    effect = effect_of(instance, sig, redex)
    assert effect_of(instance, sig, reduced) == effect
    for inputs in all_inputs(sig, effect):
        before = eval_program(redex, inputs, sig, instance)
        after = eval_program(reduced, inputs, sig, instance)
        assert (before.value, before.store, before.trace) == (after.value, after.store, after.trace)


@pytest.mark.parametrize("instance", ["memory", "trace", "reader"])
@PROPERTY
@given(data=st.data())
def test_agrees_with_direct_interpreter(instance, data):
    sig = generator_signature(instance)
    term = data.draw(programs(instance))
    for inputs in all_inputs(sig, effect_of(instance, sig, term)):
        report = eval_program(term, inputs, sig, instance)
        value, store, trace = global_state_oracle(sig, term, inputs["store"], inputs["env"])
        assert report.value == value
        assert report.store == store
        assert report.trace == trace


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(data=st.data())
def test_dead_lets_are_never_evaluated(data):
    sig = generator_signature("identity")
    term = data.draw(dead_lets())
    report = eval_program(term, sig=sig, instance="identity")
    assert report.coeffect is False
    assert report.lets[0]["live"] is False
    assert report.lets[0]["evaluations"] == 0
    cj = infer_coeffect(sig, {}, erase_effect_latents(term))
    value, counters = run_coeffect(make_partiality_instance(), cj)
    assert value == report.value
    assert counters[0] == 0


@PROPERTY
@given(data=st.data(), split=st.sampled_from(["duplicate", "latent"]))
def test_coeffect_semantics_agrees_with_evaluation(data, split):
    sig = generator_signature("identity")
    term = data.draw(programs("identity"))
    report = eval_program(term, sig=sig, instance="identity")
    cj = infer_coeffect(sig, {}, erase_effect_latents(term), split)
    value, _ = run_coeffect(make_partiality_instance(), cj)
    assert value == report.value


# ---------- worked programs ----------

def test_memory_write_then_read():
    report = eval_program("region r : int4; write r 2; read r",
                          {"store": sv.Env.of({"r": sv.int_mod(0)})})
    assert report.instance == "memory"
    assert report.value == sv.int_mod(2)
    assert report.writes == sv.Env.of({"r": sv.int_mod(2)})
    assert report.store == sv.Env.of({"r": sv.int_mod(2)})
    assert report.coeffect is None


def test_trace_records_outputs_in_order():
    report = eval_program("tag a : unit; tag b : int4; out b 3; out a unit")
    assert report.trace == (("b", sv.int_mod(3)), ("a", sv.UNIT))
    assert report.effect == ("b", "a")


def test_reader_with_function():
    report = eval_program("param p : int4; (\\x:int4. (x, ask p)) 1",
                          {"env": sv.Env.of({"p": sv.int_mod(3)})})
    assert report.value == sv.Pair(sv.int_mod(1), sv.int_mod(3))


def test_argument_coercion_runs():
    report = eval_program("param p : int4; (\\g:int4 -> {ip p} int4. g 1) (\\y:int4. y)",
                          {"env": sv.Env.of({"p": sv.int_mod(0)})})
    assert report.value == sv.int_mod(1)


def test_trace_function_called_twice():
    report = eval_program("tag a : unit; let f = \\x:unit. out a unit in f unit; f unit")
    assert report.trace == (("a", sv.UNIT), ("a", sv.UNIT))
    assert report.effect == ("a", "a")


def test_trace_ignores_environment_inputs():
    report = eval_program("tag b : int4; out b 1", {"env": sv.EMPTY_ENV, "store": sv.EMPTY_ENV})
    assert report.trace == (("b", sv.int_mod(1)),)


@pytest.mark.parametrize("source, expected", [
    ("(\\g:int4 -> {} int4. g 1) (\\y:int4. y)", sv.int_mod(1)),
    ("(\\g:int4 -> {} int4. g 1) (\\y:int4. 3)", sv.int_mod(3)),
])
def test_effect_annotated_binders_still_get_liveness(source, expected):
    report = eval_program(source)
    assert report.value == expected
    assert report.coeffect is not None
    assert report.lets == []


def test_functions_chosen_by_if_get_liveness():
    report = eval_program("let f = if true then \\x:int4. x else \\x:int4. 1 in f 2")
    assert report.value == sv.int_mod(2)
    assert report.lets == [{"id": 0, "name": "f", "live": True, "evaluations": 1}]


def test_tampered_effect_is_rejected(reader_sig):
    _, term = lc.parse("param p : int4; param q : bool; ask p")
    inst = build_instance("reader", reader_sig)
    j = infer_effect(reader_sig, inst.algebra, {}, term)
    j.effect = frozenset()
    with pytest.raises(DerivationError, match="differs from annotation"):
        denote_effect(inst, j)


def test_tampered_latent_is_rejected(reader_sig):
    _, term = lc.parse("param p : int4; param q : bool; (\\x:int4. ask p) 1")
    inst = build_instance("reader", reader_sig)
    j = infer_effect(reader_sig, inst.algebra, {}, term)
    fn = j.children[0]
    fn.type = lc.TFun(fn.type.arg, frozenset(), fn.type.res)
    with pytest.raises(DerivationError):
        denote_effect(inst, j)


def test_live_let_is_counted_once():
    report = eval_program("let x = 2 in (x, x)")
    assert report.lets == [{"id": 0, "name": "x", "live": True, "evaluations": 1}]
    assert report.coeffect is True


def test_declared_effect_is_denoted_with_iota(reader_sig):
    _, term = lc.parse("param p : int4; param q : bool; ask p")
    inst = build_instance("reader", reader_sig)
    j = check_against_annotation(infer_effect(reader_sig, inst.algebra, {}, term),
                                 frozenset(inst.algebra.generators))
    den = denote_effect(inst, j)
    env = sv.Env.of({"p": sv.int_mod(2), "q": sv.TRUE})
    assert inst.execute(den.index, den(sv.EMPTY_ENV), env, sv.EMPTY_ENV)[0] == sv.int_mod(2)


def test_denotation_needs_matching_algebra(reader_sig):
    _, term = lc.parse("param p : int4; param q : bool; ask p")
    j = infer_effect(reader_sig, lattice_algebra(reader_sig), {}, term)
    with pytest.raises(AlgebraMismatch):
        denote_effect(build_instance("memory", reader_sig), j)


@pytest.mark.parametrize("source, inputs, message", [
    ("param p : int4; ask p", {}, "asks exactly"),
    ("param p : int4; param q : bool; ask p",
     {"env": sv.Env.of({"p": sv.int_mod(0), "q": sv.TRUE})}, "asks exactly"),
    ("param p : int4; ask p", {"env": sv.Env.of({"p": sv.TRUE})}, "not a value of int4"),
    ("region r : int4; read r", {}, "missing"),
    ("region r : int4; read r", {"store": sv.Env.of({"r": sv.int_mod(0), "s": sv.TRUE})},
     "undeclared regions"),
    ("1", {"env": sv.Env.of({"p": sv.int_mod(0)})}, "no implicit parameters"),
    ("1", {"store": sv.Env.of({"r": sv.int_mod(0)})}, "has no store"),
])
def test_input_mismatch(source, inputs, message):
    with pytest.raises(InputMismatch, match=message):
        eval_program(source, inputs)


def test_select_instance_name():
    assert select_instance_name(lc.Signature.of(params={"p": "int4"})) == "reader"
    assert select_instance_name(lc.Signature.of(regions={"r": "int4"})) == "memory"
    assert select_instance_name(lc.Signature.of(tags={"a": "unit"})) == "trace"
    assert select_instance_name(lc.Signature()) == "identity"
    with pytest.raises(ValueError, match="params and regions"):
        select_instance_name(lc.Signature.of(params={"p": "int4"}, regions={"r": "int4"}))
