# core/effect_inference.py
"""Type-and-effect inference: judgments Γ ⊢ e : τ, F over an effect algebra.

Inference is syntax-directed and synthesizes the least effect. Sub-effecting
is only inserted where a join or a larger expected latent effect demands it,
and every such point is recorded as a `Coercion` on the judgment so the
semantics can apply the matching ι.
"""
import functools
import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from core import calculus as lc
from core.effect_algebra import (EffectAlgebra, format_index, implicit_param, index_tokens,
                                 lattice_algebra, out_token, read_token, write_token)
from core.errors import (DerivationError, EffectEscape, EffectTypeError, IndexOverflow,
                         NoLatticeError, ScopeError)

logger = logging.getLogger(__name__)

Context = Dict[str, lc.ObjType]


@dataclass(frozen=True)
class Coercion:
    """A sub-effecting point: ι from `source` to `target` at `site`."""

    site: str
    source: Any
    target: Any
    source_type: Optional[lc.ObjType] = None
    target_type: Optional[lc.ObjType] = None


@dataclass
class EffectJudgment:
    context: Context
    term: lc.Term
    type: lc.ObjType
    effect: Any
    rule: str
    algebra: EffectAlgebra = field(repr=False)
    children: List["EffectJudgment"] = field(default_factory=list)
    coercions: List[Coercion] = field(default_factory=list)

    def coercion_at(self, site: str) -> Optional[Coercion]:
        for coercion in self.coercions:
            if coercion.site == site:
                return coercion
        return None

    def __str__(self):
        return format_judgment(self)


# ---------- types under an algebra ----------

def resolve_type(alg: EffectAlgebra, t: lc.ObjType) -> lc.ObjType:
    """Turn written latent annotations into indices of `alg`."""

    def resolve(latent):
        if isinstance(latent, bool):
            raise EffectTypeError("coeffect flag {t}/{f} used in an effect annotation")
        return alg.from_tokens(latent)

    return lc.map_latents(t, resolve)


def is_subtype(alg: EffectAlgebra, sub: lc.ObjType, sup: lc.ObjType) -> bool:
    """Arrows are covariant in latent effect and result, invariant in argument."""
    if sub == sup:
        return True
    if isinstance(sub, lc.TProd) and isinstance(sup, lc.TProd):
        return is_subtype(alg, sub.left, sup.left) and is_subtype(alg, sub.right, sup.right)
    if isinstance(sub, lc.TFun) and isinstance(sup, lc.TFun):
        return (sub.arg == sup.arg and alg.below(sub.latent, sup.latent)
                and is_subtype(alg, sub.res, sup.res))
    return False


def join_types(alg: EffectAlgebra, left: lc.ObjType, right: lc.ObjType) -> lc.ObjType:
    if left == right:
        return left
    if isinstance(left, lc.TProd) and isinstance(right, lc.TProd):
        return lc.TProd(join_types(alg, left.left, right.left), join_types(alg, left.right, right.right))
    if isinstance(left, lc.TFun) and isinstance(right, lc.TFun) and left.arg == right.arg:
        return lc.TFun(left.arg, alg.join(left.latent, right.latent), join_types(alg, left.res, right.res))
    raise EffectTypeError(f"branches have incompatible types {left} and {right}")


def _expect(condition: bool, message: str, term: lc.Term):
    if not condition:
        raise EffectTypeError(message, term.pos)


# ---------- rules ----------

def primitive_token(term: lc.Term):
    if isinstance(term, lc.Ask):
        return implicit_param(term.param)
    if isinstance(term, lc.Read):
        return read_token(term.region)
    if isinstance(term, lc.Write):
        return write_token(term.region)
    return out_token(term.tag)


def conclude(sig: lc.Signature, alg: EffectAlgebra, ctx: Context, term: lc.Term,
             premises: List[Tuple[lc.ObjType, Any]]):
    """Apply the rule for `term` to its premises' (type, effect) pairs.

    Returns (rule name, type, effect, coercions). Shared by inference and by
    derivation replay.
    """
    unit = alg.unit
    if isinstance(term, lc.Var):
        if term.name not in ctx:
            raise ScopeError(f"unbound variable {term.name!r}", term.pos)
        return "var", ctx[term.name], unit, []
    if isinstance(term, lc.Const):
        return "const", lc.const_type(term.value), unit, []
    if isinstance(term, lc.Lam):
        (body_type, body_effect), = premises
        arg = resolve_type(alg, term.param_type)
        return "lam", lc.TFun(arg, body_effect, body_type), unit, []
    if isinstance(term, lc.App):
        (fn_type, fn_effect), (arg_type, arg_effect) = premises
        _expect(isinstance(fn_type, lc.TFun), f"applying a non-function of type {fn_type}", term)
        _expect(is_subtype(alg, arg_type, fn_type.arg),
                f"argument of type {arg_type} where {fn_type.arg} is expected", term)
        coercions = []
        if arg_type != fn_type.arg:
            coercions.append(Coercion("arg", unit, unit, arg_type, fn_type.arg))
        effect = alg.combine_all(fn_effect, arg_effect, fn_type.latent)
        return "app", fn_type.res, effect, coercions
    if isinstance(term, lc.Let):
        (_, bound_effect), (body_type, body_effect) = premises
        return "let", body_type, alg.combine(bound_effect, body_effect), []
    if isinstance(term, lc.Pair):
        (left_type, left_effect), (right_type, right_effect) = premises
        return "pair", lc.TProd(left_type, right_type), alg.combine(left_effect, right_effect), []
    if isinstance(term, (lc.Fst, lc.Snd)):
        (pair_type, effect), = premises
        _expect(isinstance(pair_type, lc.TProd), f"projection from non-pair type {pair_type}", term)
        if isinstance(term, lc.Fst):
            return "fst", pair_type.left, effect, []
        return "snd", pair_type.right, effect, []
    if isinstance(term, lc.If):
        (cond_type, cond_effect), (then_type, then_effect), (else_type, else_effect) = premises
        _expect(cond_type == lc.TBool(), f"condition has type {cond_type}, not bool", term)
        if not alg.is_lattice:
            raise NoLatticeError(f"algebra {alg.name} cannot join the branches of a conditional",
                                 term.pos)
        joined = alg.join(then_effect, else_effect)
        joined_type = join_types(alg, then_type, else_type)
        coercions = []
        for site, branch_type, branch_effect in (("then", then_type, then_effect),
                                                 ("else", else_type, else_effect)):
            if branch_effect != joined or branch_type != joined_type:
                coercions.append(Coercion(site, branch_effect, joined, branch_type, joined_type))
                logger.debug("if: iota %s -> %s on %s branch", format_index(branch_effect),
                             format_index(joined), site)
        return "if", joined_type, alg.combine(cond_effect, joined), coercions
    if isinstance(term, lc.Ask):
        return "ask", sig.param_type(term.param), alg.lift(primitive_token(term)), []
    if isinstance(term, lc.Read):
        return "read", sig.region_type(term.region), alg.lift(primitive_token(term)), []
    if isinstance(term, (lc.Write, lc.Out)):
        (value_type, value_effect), = premises
        if isinstance(term, lc.Write):
            expected, rule = sig.region_type(term.region), "write"
        else:
            expected, rule = sig.tag_type(term.tag), "out"
        _expect(value_type == expected, f"{rule} expects {expected}, got {value_type}", term)
        return rule, lc.TUnit(), alg.combine(value_effect, alg.lift(primitive_token(term))), []
    raise EffectTypeError(f"not a term: {term!r}")


def infer_effect(sig: lc.Signature, alg: EffectAlgebra, ctx: Optional[Context], term: lc.Term) -> EffectJudgment:
    """Synthesize the least-effect judgment for `term` in `ctx`."""
    ctx = dict(ctx or {})
    try:
        if isinstance(term, lc.Lam):
            inner = dict(ctx)
            inner[term.param] = resolve_type(alg, term.param_type)
            children = [infer_effect(sig, alg, inner, term.body)]
        elif isinstance(term, lc.Let):
            bound = infer_effect(sig, alg, ctx, term.bound)
            inner = dict(ctx)
            inner[term.name] = bound.type
            children = [bound, infer_effect(sig, alg, inner, term.body)]
        else:
            children = [infer_effect(sig, alg, ctx, child) for child in lc.children(term)]
        rule, t, effect, coercions = conclude(sig, alg, ctx, term,
                                              [(child.type, child.effect) for child in children])
    except (EffectTypeError, ScopeError, NoLatticeError) as exc:
        if exc.position is None:
            exc.position = term.pos
        raise
    logger.debug("%s: %s : %s, %s", rule, lc.pretty(term), t, format_index(effect))
    return EffectJudgment(ctx, term, t, effect, rule, alg, children, coercions)


def check_against_annotation(j: EffectJudgment, declared) -> EffectJudgment:
    """Weaken `j` to a declared effect, recording the final ι."""
    alg = j.algebra
    if j.effect == declared:
        return j
    if not alg.below(j.effect, declared):
        raise EffectEscape(j.effect, declared, (format_index(j.effect), format_index(declared)))
    logger.debug("sub: iota %s -> %s", format_index(j.effect), format_index(declared))
    return EffectJudgment(j.context, j.term, j.type, declared, "sub", alg, [j],
                          [Coercion("declared", j.effect, declared)])


# ---------- replay ----------

def replay_derivation(sig: lc.Signature, j: EffectJudgment) -> Tuple[lc.ObjType, Any]:
    """Re-check every node bottom-up; raise DerivationError on any disagreement."""
    alg = j.algebra
    premises = [replay_derivation(sig, child) for child in j.children]
    if j.rule == "sub":
        (t, effect), = premises
        if not alg.below(effect, j.effect) or t != j.type:
            raise DerivationError(f"sub node weakens {format_index(effect)} to "
                                  f"{format_index(j.effect)}", j.term.pos)
        return j.type, j.effect
    rule, t, effect, coercions = conclude(sig, alg, j.context, j.term, premises)
    if (rule, t, effect) != (j.rule, j.type, j.effect) or coercions != j.coercions:
        raise DerivationError(f"{j.rule} node for {lc.pretty(j.term)} claims {j.type}, "
                              f"{format_index(j.effect)}; replay gives {t}, {format_index(effect)}",
                              j.term.pos)
    for coercion in coercions:
        if not alg.below(coercion.source, coercion.target):
            raise DerivationError(f"coercion at {coercion.site} is not a weakening", j.term.pos)
    return t, effect


def judgment_to_json(j: EffectJudgment) -> Dict[str, Any]:
    coercions = []
    for coercion in j.coercions:
        item = {"site": coercion.site, "from": index_tokens(coercion.source),
                "to": index_tokens(coercion.target)}
        if coercion.source_type is not None and coercion.source_type != coercion.target_type:
            item["from_type"] = lc.format_type(coercion.source_type)
            item["to_type"] = lc.format_type(coercion.target_type)
        coercions.append(item)
    return {
        "rule": j.rule,
        "term": lc.pretty(j.term),
        "context": {name: lc.format_type(t) for name, t in sorted(j.context.items())},
        "type": lc.format_type(j.type),
        "effect": index_tokens(j.effect),
        "coercions": coercions,
        "children": [judgment_to_json(child) for child in j.children],
    }


def annotation(sig: lc.Signature, j: EffectJudgment) -> Dict[str, Any]:
    """The annotate dump: the program text, the algebra and the derivation tree."""
    return {
        "algebra": j.algebra.name,
        "program": lc.pretty_program(sig, j.term),
        "derivation": judgment_to_json(j),
    }


def _first_difference(expected, found, path="derivation") -> Optional[str]:
    if isinstance(expected, dict) and isinstance(found, dict):
        for key in sorted(set(expected) | set(found)):
            diff = _first_difference(expected.get(key), found.get(key), f"{path}.{key}")
            if diff:
                return diff
        return None
    if isinstance(expected, list) and isinstance(found, list):
        if len(expected) != len(found):
            return f"{path}: {len(found)} entries, expected {len(expected)}"
        for i, (a, b) in enumerate(zip(expected, found)):
            diff = _first_difference(a, b, f"{path}[{i}]")
            if diff:
                return diff
        return None
    return None if expected == found else f"{path}: {found!r}, expected {expected!r}"


def replay_annotation(data: Dict[str, Any], alg: Optional[EffectAlgebra] = None) -> EffectJudgment:
    """Re-validate an `annotate` dump against a fresh, replayed derivation."""
    sig, term = lc.parse(data["program"])
    if alg is None:
        if data.get("algebra") != "lattice":
            raise DerivationError(f"pass the algebra used for {data.get('algebra')!r}")
        alg = lattice_algebra(sig)
    j = infer_effect(sig, alg, {}, term)
    replay_derivation(sig, j)
    diff = _first_difference(judgment_to_json(j), data["derivation"])
    if diff:
        raise DerivationError(f"annotation does not replay: {diff}")
    return j


# ---------- brute-force admissibility ----------

def admits(sig: lc.Signature, alg: EffectAlgebra, ctx: Optional[Context], term: lc.Term, effect) -> bool:
    """Whether some derivation with subsumption assigns `term` the effect `effect`.

    Searches every split of the effect over the carrier rather than reusing
    the synthesis rules; intended for small programs and carriers.
    """
    carrier = alg.carrier

    def leq(a, b) -> bool:
        return a == b or (alg.is_lattice and alg.leq(a, b))

    @functools.lru_cache(maxsize=None)
    def go(node_id: int, target) -> bool:
        j = nodes[node_id]
        term = j.term
        kids = [index_of[id(child)] for child in j.children]
        if isinstance(term, (lc.Var, lc.Const, lc.Lam)):
            return leq(alg.unit, target)
        if isinstance(term, (lc.Ask, lc.Read)):
            return leq(alg.lift(primitive_token(term)), target)
        if isinstance(term, (lc.Fst, lc.Snd)):
            return go(kids[0], target)
        if isinstance(term, (lc.Write, lc.Out)):
            token = alg.lift(primitive_token(term))
            return any(go(kids[0], a) and _within(alg.combine, (a, token), target) for a in carrier)
        if isinstance(term, (lc.Let, lc.Pair)):
            return any(go(kids[0], a) and go(kids[1], b) and _within(alg.combine, (a, b), target)
                       for a, b in itertools.product(carrier, repeat=2))
        if isinstance(term, lc.App):
            latent = j.children[0].type.latent
            return any(go(kids[0], a) and go(kids[1], b)
                       and _within(alg.combine, (a, b, latent), target)
                       for a, b in itertools.product(carrier, repeat=2))
        if isinstance(term, lc.If):
            return any(go(kids[0], a) and go(kids[1], b) and go(kids[2], b)
                       and _within(alg.combine, (a, b), target)
                       for a, b in itertools.product(carrier, repeat=2))
        raise EffectTypeError(f"not a term: {term!r}")

    def _within(combine, parts, target) -> bool:
        try:
            total = functools.reduce(combine, parts)
        except IndexOverflow:
            return False
        return leq(total, target)

    root = infer_effect(sig, alg, ctx, term)
    nodes, index_of = [], {}

    def number(j):
        index_of[id(j)] = len(nodes)
        nodes.append(j)
        for child in j.children:
            number(child)

    number(root)
    return go(0, effect)


def format_judgment(j: EffectJudgment) -> str:
    context = ", ".join(f"{name} : {t}" for name, t in j.context.items())
    prefix = f"{context} " if context else ""
    return f"{prefix}⊢ {lc.pretty(j.term)} : {j.type}, {format_index(j.effect)}"
