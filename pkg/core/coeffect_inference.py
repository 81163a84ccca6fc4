# core/coeffect_inference.py
"""Scalar liveness as a coeffect system: judgments Γ ? F ⊢ e : τ with F ∈ {f, t}.

t means the context is required, f that it is not. Demands compose with the
algebra's ∧ where a requirement is released through a latent annotation, and
with the structural "any part needs it" join where parts share the context.
"""
import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from core import calculus as lc
from core.effect_algebra import EffectAlgebra, bool_conj_algebra, format_index
from core.errors import EffectTypeError, ScopeError, UnsupportedPrimitive

logger = logging.getLogger(__name__)

SPLIT_POLICIES = ("duplicate", "latent")


@dataclass
class LetLiveness:
    let_id: int
    name: str
    live: bool
    bound: str
    line: Optional[int] = None
    column: Optional[int] = None

    def to_json(self) -> Dict:
        return {"id": self.let_id, "name": self.name, "live": self.live, "bound": self.bound,
                "line": self.line, "column": self.column}


@dataclass
class CoeffectJudgment:
    context: Dict[str, lc.ObjType]
    term: lc.Term
    type: lc.ObjType
    coeffect: bool
    rule: str
    children: List["CoeffectJudgment"] = field(default_factory=list)
    # lam: the (immediate, latent) split of the body demand
    immediate: Optional[bool] = None
    latent: Optional[bool] = None
    # let: position in the liveness table
    let_id: Optional[int] = None
    liveness: List[LetLiveness] = field(default_factory=list)
    # app/if: site -> (inferred type, type it is used at)
    casts: Dict[str, Tuple[lc.ObjType, lc.ObjType]] = field(default_factory=dict)

    def __str__(self):
        return format_coeffect_judgment(self)


def _coeffect_type(t: lc.ObjType) -> lc.ObjType:
    def check(latent):
        if not isinstance(latent, bool):
            raise EffectTypeError(f"coeffect arrows carry {{t}} or {{f}}, not "
                                  f"{lc.format_latent(latent)}")
        return latent
    return lc.map_latents(t, check)


def _as_demand(latent):
    return latent if isinstance(latent, bool) else True


def erase_effect_latents(term: lc.Term) -> lc.Term:
    """Read every effect latent on a binder annotation as the demand t.

    Lets the liveness pass run on programs typed for the effect system: a
    function-typed parameter is assumed to use its argument.
    """
    updates = {f.name: erase_effect_latents(getattr(term, f.name)) for f in dataclasses.fields(term)
               if isinstance(getattr(term, f.name), lc.Term)}
    if isinstance(term, lc.Lam):
        updates["param_type"] = lc.map_latents(term.param_type, _as_demand)
    return dataclasses.replace(term, **updates) if updates else term


def coeffect_subtype(s: lc.ObjType, t: lc.ObjType) -> bool:
    """A value of type s can stand where t is expected: arrows may demand less."""
    if isinstance(s, lc.TFun) and isinstance(t, lc.TFun):
        return (coeffect_subtype(t.arg, s.arg) and (not s.latent or t.latent)
                and coeffect_subtype(s.res, t.res))
    if isinstance(s, lc.TProd) and isinstance(t, lc.TProd):
        return coeffect_subtype(s.left, t.left) and coeffect_subtype(s.right, t.right)
    return s == t


def _bound(s: lc.ObjType, t: lc.ObjType, upper: bool) -> Optional[lc.ObjType]:
    if isinstance(s, lc.TFun) and isinstance(t, lc.TFun):
        arg, res = _bound(s.arg, t.arg, not upper), _bound(s.res, t.res, upper)
        if arg is None or res is None:
            return None
        latent = (s.latent or t.latent) if upper else (s.latent and t.latent)
        return lc.TFun(arg, latent, res)
    if isinstance(s, lc.TProd) and isinstance(t, lc.TProd):
        left, right = _bound(s.left, t.left, upper), _bound(s.right, t.right, upper)
        if left is None or right is None:
            return None
        return lc.TProd(left, right)
    return s if s == t else None


def coeffect_join(s: lc.ObjType, t: lc.ObjType) -> Optional[lc.ObjType]:
    """Least common supertype, or None when the shapes differ."""
    return _bound(s, t, True)


def split_demand(demand: bool, policy: str):
    """Choose (immediate, latent) with immediate ∧ latent = demand."""
    if policy == "duplicate":
        return demand, demand
    if policy == "latent":
        return True, demand
    raise ValueError(f"unknown lambda split policy {policy!r}; choose from {', '.join(SPLIT_POLICIES)}")


class _Inferer:
    def __init__(self, sig: lc.Signature, split: str):
        self.sig = sig
        self.split = split
        self.algebra = bool_conj_algebra()
        self.liveness: List[LetLiveness] = []

    def infer(self, ctx, term) -> CoeffectJudgment:
        try:
            return self._infer(ctx, term)
        except (EffectTypeError, ScopeError, UnsupportedPrimitive) as exc:
            if exc.position is None:
                exc.position = term.pos
            raise

    def _infer(self, ctx, term) -> CoeffectJudgment:
        alg = self.algebra
        if isinstance(term, lc.PRIMITIVES):
            raise UnsupportedPrimitive(f"primitive not supported by coeffect analysis: "
                                       f"{lc.pretty(term)}", term.pos)
        if isinstance(term, lc.Var):
            if term.name not in ctx:
                raise ScopeError(f"unbound variable {term.name!r}", term.pos)
            return CoeffectJudgment(ctx, term, ctx[term.name], True, "var")
        if isinstance(term, lc.Const):
            return CoeffectJudgment(ctx, term, lc.const_type(term.value), False, "const")
        if isinstance(term, lc.Lam):
            arg = _coeffect_type(term.param_type)
            inner = dict(ctx)
            inner[term.param] = arg
            body = self.infer(inner, term.body)
            immediate, latent = split_demand(body.coeffect, self.split)
            return CoeffectJudgment(ctx, term, lc.TFun(arg, latent, body.type), immediate, "lam",
                                    [body], immediate=immediate, latent=latent)
        if isinstance(term, lc.App):
            fn = self.infer(ctx, term.fn)
            arg = self.infer(ctx, term.arg)
            if not isinstance(fn.type, lc.TFun):
                raise EffectTypeError(f"applying a non-function of type {fn.type}", term.pos)
            if not coeffect_subtype(arg.type, fn.type.arg):
                raise EffectTypeError(f"argument of type {arg.type} where {fn.type.arg} is expected",
                                      term.pos)
            demand = fn.coeffect or alg.combine(fn.type.latent, arg.coeffect)
            casts = {"arg": (arg.type, fn.type.arg)} if arg.type != fn.type.arg else {}
            return CoeffectJudgment(ctx, term, fn.type.res, demand, "app", [fn, arg], casts=casts)
        if isinstance(term, lc.Let):
            entry = LetLiveness(len(self.liveness), term.name, False, lc.pretty(term.bound),
                                *(term.pos or (None, None)))
            self.liveness.append(entry)
            bound = self.infer(ctx, term.bound)
            inner = dict(ctx)
            inner[term.name] = bound.type
            body = self.infer(inner, term.body)
            entry.live = body.coeffect
            demand = body.coeffect or alg.combine(body.coeffect, bound.coeffect)
            logger.debug("let %s (#%d): %s", term.name, entry.let_id, "live" if entry.live else "dead")
            return CoeffectJudgment(ctx, term, body.type, demand, "let", [bound, body],
                                    let_id=entry.let_id)
        if isinstance(term, lc.Pair):
            left, right = self.infer(ctx, term.first), self.infer(ctx, term.second)
            return CoeffectJudgment(ctx, term, lc.TProd(left.type, right.type),
                                    left.coeffect or right.coeffect, "pair", [left, right])
        if isinstance(term, (lc.Fst, lc.Snd)):
            inner = self.infer(ctx, term.expr)
            if not isinstance(inner.type, lc.TProd):
                raise EffectTypeError(f"projection from non-pair type {inner.type}", term.pos)
            if isinstance(term, lc.Fst):
                return CoeffectJudgment(ctx, term, inner.type.left, inner.coeffect, "fst", [inner])
            return CoeffectJudgment(ctx, term, inner.type.right, inner.coeffect, "snd", [inner])
        if isinstance(term, lc.If):
            parts = [self.infer(ctx, child) for child in (term.cond, term.then, term.orelse)]
            cond, then, orelse = parts
            if cond.type != lc.TBool():
                raise EffectTypeError(f"condition has type {cond.type}, not bool", term.pos)
            joined = coeffect_join(then.type, orelse.type)
            if joined is None:
                raise EffectTypeError(f"branches have types {then.type} and {orelse.type}", term.pos)
            casts = {site: (branch.type, joined) for site, branch in (("then", then), ("else", orelse))
                     if branch.type != joined}
            demand = any(part.coeffect for part in parts)
            return CoeffectJudgment(ctx, term, joined, demand, "if", parts, casts=casts)
        raise EffectTypeError(f"not a term: {term!r}")


def infer_coeffect(sig: lc.Signature, ctx: Optional[Dict[str, lc.ObjType]], term: lc.Term,
                   split: str = "duplicate") -> CoeffectJudgment:
    """Synthesize the liveness judgment and the per-let liveness table."""
    split_demand(False, split)
    inferer = _Inferer(sig, split)
    j = inferer.infer(dict(ctx or {}), term)
    j.liveness = inferer.liveness
    return j


def coeffect_algebra() -> EffectAlgebra:
    return bool_conj_algebra()


def iter_judgments(j: CoeffectJudgment):
    yield j
    for child in j.children:
        yield from iter_judgments(child)


def coeffect_to_json(j: CoeffectJudgment) -> Dict:
    data = {
        "rule": j.rule,
        "term": lc.pretty(j.term),
        "type": lc.format_type(j.type),
        "coeffect": format_index(j.coeffect),
        "children": [coeffect_to_json(child) for child in j.children],
    }
    if j.rule == "lam":
        data["split"] = {"immediate": format_index(j.immediate), "latent": format_index(j.latent)}
    if j.let_id is not None:
        data["let"] = j.let_id
    if j.casts:
        data["casts"] = {site: {"from": lc.format_type(source), "to": lc.format_type(target)}
                         for site, (source, target) in sorted(j.casts.items())}
    return data


def format_coeffect_judgment(j: CoeffectJudgment) -> str:
    context = ", ".join(f"{name} : {t}" for name, t in j.context.items())
    prefix = f"{context} " if context else ""
    return f"{prefix}? {format_index(j.coeffect)} ⊢ {lc.pretty(j.term)} : {j.type}"
