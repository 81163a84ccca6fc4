import pytest

from core import calculus as lc
from core import values as sv
from core.coeffect_inference import (coeffect_join, coeffect_subtype, coeffect_to_json,
                                     erase_effect_latents, format_coeffect_judgment, infer_coeffect,
                                     iter_judgments, split_demand)
from core.errors import EffectTypeError, UnsupportedPrimitive

INT = lc.TIntMod(4)


def liveness(source, split="duplicate"):
    sig, term = lc.parse(source)
    return infer_coeffect(sig, {}, term, split)


def test_unused_binding_is_dead():
    j = liveness("let x = (\\y:int4. y) 3 in true")
    assert j.coeffect is False
    [entry] = j.liveness
    assert (entry.let_id, entry.name, entry.live) == (0, "x", False)
    assert entry.bound == "(\\y:int4. y) 3"
    assert (entry.line, entry.column) == (1, 1)


def test_used_binding_is_live():
    j = liveness("let x = 2 in (x, x)")
    assert j.coeffect is True
    assert [entry.live for entry in j.liveness] == [True]


def test_nested_lets_are_numbered_in_order():
    j = liveness("let a = 1 in let b = a in (b, let c = true in 3)")
    assert [(e.let_id, e.name, e.live) for e in j.liveness] == [
        (0, "a", True), (1, "b", True), (2, "c", False)]


def test_constants_need_no_context():
    assert liveness("(1, true)").coeffect is False
    assert liveness("fst (1, true)").coeffect is False


def test_variables_need_their_context():
    j = infer_coeffect(lc.Signature(), {"x": INT}, lc.Var("x"))
    assert j.coeffect is True
    assert format_coeffect_judgment(j) == "x : int4 ? t ⊢ x : int4"


def test_lambda_split_policies():
    term = lc.Lam("x", INT, lc.Var("x"))
    dup = infer_coeffect(lc.Signature(), {}, term, "duplicate")
    assert (dup.immediate, dup.latent) == (True, True)
    assert dup.type == lc.TFun(INT, True, INT)

    const = lc.Lam("x", INT, lc.Const(sv.int_mod(1)))
    assert (infer_coeffect(lc.Signature(), {}, const, "duplicate").coeffect) is False
    latent = infer_coeffect(lc.Signature(), {}, const, "latent")
    assert (latent.immediate, latent.latent) == (True, False)
    assert latent.coeffect is True


@pytest.mark.parametrize("demand", [False, True])
@pytest.mark.parametrize("policy", ["duplicate", "latent"])
def test_split_recombines_to_demand(demand, policy):
    immediate, latent = split_demand(demand, policy)
    assert (immediate and latent) == demand


def test_unknown_split_policy():
    with pytest.raises(ValueError, match="lambda split"):
        liveness("1", split="eager")


def test_application_releases_demand_through_latent():
    ctx = {"y": INT}
    ignoring = lc.App(lc.Lam("x", INT, lc.Const(sv.TRUE)), lc.Var("y"))
    assert infer_coeffect(lc.Signature(), ctx, ignoring).coeffect is False
    using = lc.App(lc.Lam("x", INT, lc.Var("x")), lc.Var("y"))
    assert infer_coeffect(lc.Signature(), ctx, using).coeffect is True


def test_conditional_needs_context_if_any_part_does():
    ctx = {"b": lc.TBool()}
    term = lc.If(lc.Const(sv.TRUE), lc.Var("b"), lc.Const(sv.FALSE))
    assert infer_coeffect(lc.Signature(), ctx, term).coeffect is True


def test_primitives_are_rejected():
    with pytest.raises(UnsupportedPrimitive, match="coeffect analysis") as info:
        liveness("param p : int4;\nlet x = ask p in x")
    assert info.value.position == (2, 9)


def test_effect_annotations_are_rejected():
    with pytest.raises(EffectTypeError, match="coeffect arrows"):
        liveness("param p : int4; \\g:int4 -> {ip p} int4. g 1")


def test_flag_annotations_are_accepted():
    j = liveness("\\g:int4 -> {f} int4. g 1")
    assert j.type == lc.TFun(lc.TFun(INT, False, INT), True, INT)
    app = j.children[0]
    assert app.rule == "app"
    assert app.coeffect is True


@pytest.mark.parametrize("source", ["fst 1", "1 2", "if 1 then 2 else 3", "if true then 1 else false"])
def test_type_errors(source):
    with pytest.raises(EffectTypeError):
        liveness(source)


def test_json_shape():
    data = coeffect_to_json(liveness("let f = \\x:int4. x in f 1"))
    assert data["rule"] == "let"
    assert data["let"] == 0
    assert data["coeffect"] == "t"
    lam = data["children"][0]
    assert lam["split"] == {"immediate": "t", "latent": "t"}
    assert "split" not in data["children"][1]


def test_iter_judgments_walks_the_tree():
    rules = [j.rule for j in iter_judgments(liveness("(fst (1, true), 2)"))]
    assert rules == ["pair", "fst", "pair", "const", "const", "const"]


def test_erased_effect_latents_demand_their_argument():
    sig, term = lc.parse("param p : int4; \\g:int4 -> {ip p} int4. g 1")
    erased = erase_effect_latents(term)
    assert erased.param_type == lc.TFun(INT, True, INT)
    assert erased.body == term.body
    j = infer_coeffect(sig, {}, erased)
    assert j.type == lc.TFun(lc.TFun(INT, True, INT), True, INT)


def test_erasure_keeps_flag_annotations():
    _, term = lc.parse("let h = \\g:int4 -> {f} int4. g 1 in h")
    assert erase_effect_latents(term) == term


LIVE = lc.TFun(INT, True, INT)
DEAD = lc.TFun(INT, False, INT)


def test_arrows_may_demand_less():
    assert coeffect_subtype(DEAD, LIVE)
    assert not coeffect_subtype(LIVE, DEAD)
    assert coeffect_subtype(lc.TFun(LIVE, True, INT), lc.TFun(DEAD, True, INT))
    assert not coeffect_subtype(lc.TFun(DEAD, True, INT), lc.TFun(LIVE, True, INT))
    assert coeffect_subtype(lc.TProd(DEAD, INT), lc.TProd(LIVE, INT))
    assert not coeffect_subtype(INT, lc.TBool())


def test_join_of_arrows():
    assert coeffect_join(DEAD, LIVE) == LIVE
    assert coeffect_join(lc.TFun(DEAD, False, INT), lc.TFun(LIVE, False, INT)) == lc.TFun(LIVE, False, INT)
    assert coeffect_join(INT, lc.TBool()) is None


def test_argument_demanding_less_is_cast():
    j = liveness("(\\g:int4 -> {t} int4. g 1) (\\y:int4. 3)")
    assert j.casts == {"arg": (DEAD, LIVE)}
    assert coeffect_to_json(j)["casts"] == {"arg": {"from": "int4 -> {f} int4", "to": "int4 -> {t} int4"}}


def test_branches_with_different_latents_are_joined():
    j = liveness("if true then \\x:int4. x else \\x:int4. 1")
    assert j.type == LIVE
    assert j.casts == {"else": (DEAD, LIVE)}


def test_argument_demanding_more_is_rejected():
    with pytest.raises(EffectTypeError, match="is expected"):
        liveness("(\\g:int4 -> {f} int4. g 1) (\\y:int4. y)")
