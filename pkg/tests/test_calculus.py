import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from core import calculus as lc
from core import values as sv
from core.effect_algebra import implicit_param, write_token
from core.errors import EffectTypeError, ScopeError, SourceSyntaxError
from core.generator import beta_redexes, generator_signature, programs


def test_parse_program_with_declarations():
    sig, term = lc.parse("param p : int4;\nregion r : bool;\ntag a : unit;\nask p")
    assert sig.params == (("p", lc.TIntMod(4)),)
    assert sig.regions == (("r", lc.TBool()),)
    assert sig.tags == (("a", lc.TUnit()),)
    assert term == lc.Ask("p")
    assert term.pos == (4, 1)


def test_sequencing_is_let_underscore():
    _, term = lc.parse("region r : int4; write r 1; read r")
    assert term == lc.Let("_", lc.Write("r", lc.Const(sv.int_mod(1))), lc.Read("r"))


def test_application_is_left_associative():
    _, term = lc.parse("let f = \\x:int4. \\y:int4. x in f 1 2")
    assert term.body == lc.App(lc.App(lc.Var("f"), lc.Const(sv.int_mod(1))), lc.Const(sv.int_mod(2)))


def test_digits_reduce_mod_4():
    _, term = lc.parse("7")
    assert term == lc.Const(sv.IntMod(3, 4))


def test_arrow_types_with_latents():
    t = lc.parse_type("int4 -> {ip p} (int4 -> {} bool)", lc.Signature.of(params={"p": "int4"}))
    assert t == lc.TFun(lc.TIntMod(4), (implicit_param("p"),), lc.TFun(lc.TIntMod(4), (), lc.TBool()))
    assert lc.parse_type("(int4, bool)") == lc.TProd(lc.TIntMod(4), lc.TBool())
    assert lc.parse_type("unit -> {t} unit") == lc.TFun(lc.TUnit(), True, lc.TUnit())


def test_arrow_argument_needs_parentheses():
    t = lc.TFun(lc.TFun(lc.TUnit(), (), lc.TUnit()), (), lc.TUnit())
    assert lc.format_type(t) == "(unit -> {} unit) -> {} unit"
    assert lc.parse_type(lc.format_type(t)) == t


def test_comments_are_ignored():
    _, term = lc.parse("-- a comment\n(1, true) -- trailing\n")
    assert term == lc.Pair(lc.Const(sv.int_mod(1)), lc.Const(sv.TRUE))


@pytest.mark.parametrize("source", ["let x = in x", "(1, ", "\\x. x", "fst"])
def test_syntax_errors_carry_position(source):
    with pytest.raises(SourceSyntaxError) as info:
        lc.parse(source)
    assert info.value.line >= 1 and info.value.col >= 1
    assert info.value.diagnostic()["kind"] == "syntax"


@pytest.mark.parametrize("source, message", [
    ("x", "unbound variable 'x'"),
    ("ask p", "undeclared implicit parameter 'p'"),
    ("param p : int4; read p", "undeclared region 'p'"),
    ("param p : int4; param p : bool; unit", "declared twice"),
    ("\\f:unit -> {wr r} unit. unit", "undeclared region 'r'"),
])
def test_scope_errors(source, message):
    with pytest.raises(ScopeError, match=message):
        lc.parse(source)


def test_mixed_coeffect_flags_rejected():
    with pytest.raises(EffectTypeError):
        lc.parse("\\f:unit -> {t, f} unit. unit")


def test_free_vars():
    term = lc.Lam("x", lc.TIntMod(4), lc.Let("y", lc.Var("x"), lc.Pair(lc.Var("y"), lc.Var("z"))))
    assert lc.free_vars(term) == frozenset({"z"})


def test_substitute_avoids_capture():
    term = lc.Lam("y", lc.TIntMod(4), lc.Pair(lc.Var("x"), lc.Var("y")))
    result = lc.substitute(term, "x", lc.Var("y"))
    assert isinstance(result, lc.Lam)
    assert result.param != "y"
    assert result.body == lc.Pair(lc.Var("y"), lc.Var(result.param))


def test_substitute_stops_at_shadowing_binder():
    term = lc.Let("x", lc.Var("x"), lc.Var("x"))
    assert lc.substitute(term, "x", lc.Const(sv.TRUE)) == lc.Let("x", lc.Const(sv.TRUE), lc.Var("x"))


def test_pretty_uses_minimal_parentheses():
    _, term = lc.parse("(\\x:int4. x) ((\\y:int4. y) 2)")
    assert lc.pretty(term) == "(\\x:int4. x) ((\\y:int4. y) 2)"
    _, term = lc.parse("fst ((1, 2))")
    assert lc.pretty(term) == "fst (1, 2)"


def test_uses_primitives():
    assert lc.uses_primitives(lc.parse("region r : int4; (1, read r)")[1])
    assert not lc.uses_primitives(lc.parse("let x = 1 in x")[1])


def test_type_domain():
    assert lc.type_domain(lc.TProd(lc.TBool(), lc.TIntMod(4))).size() == 8
    with pytest.raises(EffectTypeError):
        lc.type_domain(lc.TFun(lc.TUnit(), (), lc.TUnit()))


def test_signature_tokens():
    sig = lc.Signature.of(regions={"r": "int4"})
    assert write_token("r") in sig.tokens()
    assert sig.declared_kinds() == ["regions"]
    with pytest.raises(ScopeError):
        lc.Signature.of(params={"let": "int4"})


@pytest.mark.parametrize("source, position", [
    ("let x = in x", (1, 9)),
    ("\\in:int4. in", (1, 2)),
    ("let unit = 1 in unit", (1, 5)),
    ("let then = 1 in then", (1, 5)),
])
def test_keywords_never_lex_as_names(source, position):
    with pytest.raises(SourceSyntaxError) as info:
        lc.parse(source)
    assert (info.value.line, info.value.col) == position


def test_names_may_start_with_a_keyword():
    _, term = lc.parse("let input = 1 in let lets = input in lets")
    assert term == lc.Let("input", lc.Const(sv.int_mod(1)),
                          lc.Let("lets", lc.Var("input"), lc.Var("lets")))


@pytest.mark.parametrize("instance", ["reader", "memory", "trace", "identity"])
@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(data=st.data())
def test_pretty_parse_round_trip(instance, data):
    sig = generator_signature(instance)
    term = data.draw(programs(instance))
    parsed_sig, parsed = lc.parse(lc.pretty_program(sig, term))
    assert parsed_sig == sig
    assert parsed == term


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(data=st.data())
def test_round_trip_keeps_latent_annotations(data):
    redex, _ = data.draw(beta_redexes("reader"))
    sig = generator_signature("reader")
    assert lc.parse(lc.pretty_program(sig, redex))[1] == redex
