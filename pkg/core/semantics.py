# core/semantics.py
"""Indexed denotational semantics and the evaluator built on it.

`denote_effect` compiles an effect derivation into ⟦Γ⟧ → T F ⟦τ⟧ using only
the instance's η, μ, ι, strength and functor action; the index it carries is
recomputed from the denotations of the premises, so comparing it with the
judgment's effect is a real check. `denote_coeffect` compiles a liveness
derivation into D F ⟦Γ⟧ → ⟦τ⟧ over the partiality comonad, where a binding
at index f is never evaluated.
"""
import collections
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from config import DEFAULT_CONFIG
from core import calculus as lc
from core import values as sv
from core.coeffect_inference import CoeffectJudgment, erase_effect_latents, infer_coeffect
from core.effect_algebra import TokenKind, format_index
from core.effect_inference import EffectJudgment, infer_effect, primitive_token
from core.errors import AlgebraMismatch, DerivationError, IndexMismatch, InputMismatch
from core.indexed_comonad import IndexedComonad, make_partiality_instance
from core.indexed_monad import IndexedMonad, build_instance, names_of

logger = logging.getLogger(__name__)


@dataclass
class Denotation:
    index: Any
    fn: Callable
    judgment: Any = field(default=None, repr=False)

    def __call__(self, *args):
        return self.fn(*args)


# ---------- value domains ----------

def value_domain(inst: IndexedMonad, t: lc.ObjType) -> sv.Domain:
    """⟦τ⟧ with arrows read as σ ⇒ T L τ."""
    if isinstance(t, lc.TFun):
        return sv.fun_domain(value_domain(inst, t.arg), inst.carrier_of(t.latent, value_domain(inst, t.res)))
    if isinstance(t, lc.TProd):
        return sv.ProductDomain(value_domain(inst, t.left), value_domain(inst, t.right))
    return lc.type_domain(t)


def coeffect_value_domain(inst: IndexedComonad, t: lc.ObjType) -> sv.Domain:
    """⟦τ⟧ with arrows read as D L σ → τ."""
    if isinstance(t, lc.TFun):
        return sv.fun_domain(inst.carrier_of(t.latent, coeffect_value_domain(inst, t.arg)),
                             coeffect_value_domain(inst, t.res))
    if isinstance(t, lc.TProd):
        return sv.ProductDomain(coeffect_value_domain(inst, t.left), coeffect_value_domain(inst, t.right))
    return lc.type_domain(t)


# ---------- effect side ----------

class _EffectCompiler:
    def __init__(self, inst: IndexedMonad):
        self.inst = inst
        self.alg = inst.algebra

    def bind(self, first, second, t, k):
        """μ_{F,G} ∘ T_F k."""
        inst = self.inst
        return inst.mu(first, second, inst.fmap(first, k, t))

    def bind_in_context(self, first, second, env, t, k):
        """μ_{F,G} ∘ T_F k ∘ τ_F: the environment is carried through by strength."""
        inst = self.inst
        paired = inst.strength(first, env, t)
        return inst.mu(first, second, inst.fmap(first, lambda p: k(p.fst, p.snd), paired))

    def coerce_value(self, value, source: lc.ObjType, target: lc.ObjType):
        """Weaken a value along an arrow subtyping: ι on latent effects."""
        if source == target:
            return value
        if isinstance(source, lc.TProd):
            return sv.Pair(self.coerce_value(value.fst, source.left, target.left),
                           self.coerce_value(value.snd, source.right, target.right))
        inst = self.inst

        def weakened(arg):
            result = inst.iota(source.latent, target.latent, value(arg))
            return inst.fmap(target.latent, lambda v: self.coerce_value(v, source.res, target.res), result)

        return sv.Fun(value_domain(inst, target.arg), weakened)

    def coerce(self, coercion, t):
        inst = self.inst
        if coercion is None:
            return t
        t = inst.iota(coercion.source, coercion.target, t)
        if coercion.source_type is not None and coercion.source_type != coercion.target_type:
            t = inst.fmap(coercion.target, lambda v: self.coerce_value(
                v, coercion.source_type, coercion.target_type), t)
        return t

    def compile(self, j: EffectJudgment) -> Denotation:
        inst, alg, term = self.inst, self.alg, j.term
        kids = [self.compile(child) for child in j.children]

        if j.rule == "sub":
            (inner,) = kids
            return Denotation(j.effect, lambda env: inst.iota(inner.index, j.effect, inner(env)), j)
        if j.rule == "var":
            return Denotation(alg.unit, lambda env: inst.eta(env[term.name]), j)
        if j.rule == "const":
            return Denotation(alg.unit, lambda env: inst.eta(term.value), j)
        if j.rule == "lam":
            (body,) = kids
            domain = value_domain(inst, j.type.arg)

            def closure(env):
                return inst.eta(sv.Fun(domain, lambda v: body(env.extend(term.param, v))))

            return Denotation(alg.unit, closure, j)
        if j.rule == "app":
            fn, arg = kids
            fn_type = j.children[0].type
            latent = fn_type.latent
            inner_index = alg.combine(arg.index, latent)
            coercion = j.coercion_at("arg")

            def apply(env):
                def call(env_, f):
                    def with_arg(a):
                        if coercion is not None:
                            a = self.coerce_value(a, coercion.source_type, coercion.target_type)
                        return f(a)
                    return self.bind(arg.index, latent, arg(env_), with_arg)
                return self.bind_in_context(fn.index, inner_index, env, fn(env), call)

            return Denotation(alg.combine(fn.index, inner_index), apply, j)
        if j.rule == "let":
            bound, body = kids
            return Denotation(
                alg.combine(bound.index, body.index),
                lambda env: self.bind_in_context(bound.index, body.index, env, bound(env),
                                                 lambda env_, a: body(env_.extend(term.name, a))),
                j)
        if j.rule == "pair":
            left, right = kids

            def pair(env):
                return self.bind_in_context(
                    left.index, right.index, env, left(env),
                    lambda env_, a: inst.fmap(right.index, lambda b: sv.Pair(a, b), right(env_)))

            return Denotation(alg.combine(left.index, right.index), pair, j)
        if j.rule in ("fst", "snd"):
            (inner,) = kids
            project = (lambda p: p.fst) if j.rule == "fst" else (lambda p: p.snd)
            return Denotation(inner.index, lambda env: inst.fmap(inner.index, project, inner(env)), j)
        if j.rule == "if":
            cond, then, orelse = kids
            joined = alg.join(then.index, orelse.index)
            coercions = {"then": j.coercion_at("then"), "else": j.coercion_at("else")}

            def branch(env):
                def choose(env_, b):
                    if b.value:
                        return self.coerce(coercions["then"], then(env_))
                    return self.coerce(coercions["else"], orelse(env_))
                return self.bind_in_context(cond.index, joined, env, cond(env), choose)

            return Denotation(alg.combine(cond.index, joined), branch, j)
        if j.rule == "ask":
            token = alg.lift(primitive_token(term))
            return Denotation(token, lambda env: inst.ask(term.param), j)
        if j.rule == "read":
            token = alg.lift(primitive_token(term))
            return Denotation(token, lambda env: inst.read(term.region), j)
        if j.rule in ("write", "out"):
            (inner,) = kids
            token = alg.lift(primitive_token(term))
            if j.rule == "write":
                def perform(v):
                    return inst.write(term.region, v)
            else:
                def perform(v):
                    return inst.out(term.tag, v)
            return Denotation(alg.combine(inner.index, token),
                              lambda env: self.bind(inner.index, token, inner(env), perform), j)
        raise AlgebraMismatch(f"no denotation for rule {j.rule!r}")


def denote_effect(inst: IndexedMonad, j: EffectJudgment) -> Denotation:
    """⟦Γ ⊢ e : τ, F⟧ : ⟦Γ⟧ → T F ⟦τ⟧, compiled over the derivation tree."""
    if j.algebra != inst.algebra:
        raise AlgebraMismatch(f"judgment over {j.algebra.name} cannot be denoted by "
                              f"{inst.name} over {inst.algebra.name}")
    den = _EffectCompiler(inst).compile(j)
    if den.index != j.effect:
        raise DerivationError(f"denotation index {format_index(den.index)} differs from "
                              f"annotation {format_index(j.effect)}", j.term.pos)
    return den


# ---------- coeffect side ----------

class _CoeffectCompiler:
    def __init__(self, inst: IndexedComonad):
        self.inst = inst

    def slice(self, d, demand: bool):
        """Restrict a context to a (weaker or equal) demand."""
        if not demand:
            return sv.ABSENT
        if d == sv.ABSENT:
            raise IndexMismatch("context demanded but absent")
        return d

    def extend(self, zipped, name):
        if zipped == sv.ABSENT:
            return sv.ABSENT
        return zipped.fst.extend(name, zipped.snd)

    def coerce_value(self, value, source: lc.ObjType, target: lc.ObjType):
        """Use a value at a supertype: an arrow demanding f drops the argument it is given."""
        if source == target:
            return value
        if isinstance(source, lc.TProd):
            return sv.Pair(self.coerce_value(value.fst, source.left, target.left),
                           self.coerce_value(value.snd, source.right, target.right))
        inst = self.inst

        def relaxed(a):
            if source.latent:
                a = inst.fmap(target.latent, lambda v: self.coerce_value(v, target.arg, source.arg), a)
            else:
                a = sv.ABSENT
            return self.coerce_value(value(a), source.res, target.res)

        return sv.Fun(inst.carrier_of(target.latent, coeffect_value_domain(inst, target.arg)), relaxed)

    def cast(self, j: CoeffectJudgment, site: str, value):
        if site not in j.casts:
            return value
        return self.coerce_value(value, *j.casts[site])

    def compile(self, j: CoeffectJudgment) -> Denotation:
        inst, term = self.inst, j.term
        kids = [self.compile(child) for child in j.children]

        if j.rule == "var":
            return Denotation(True, lambda d, counters: inst.epsilon(d)[term.name], j)
        if j.rule == "const":
            return Denotation(False, lambda d, counters: term.value, j)
        if j.rule == "lam":
            (body,) = kids
            immediate, latent = j.immediate, j.latent
            domain = inst.carrier_of(latent, coeffect_value_domain(inst, j.type.arg))

            def closure(d, counters):
                def call(a):
                    context = self.extend(inst.mzip(immediate, latent, d, a), term.param)
                    return body(context, counters)
                return sv.Fun(domain, call)

            return Denotation(immediate, closure, j)
        if j.rule == "app":
            fn, arg = kids
            latent = j.children[0].type.latent
            demand = inst.algebra.combine(latent, arg.index)

            def apply(d, counters):
                f = fn(self.slice(d, fn.index), counters)
                layered = inst.delta(latent, arg.index, self.slice(d, demand))
                return f(inst.fmap(latent, lambda inner: self.cast(j, "arg", arg(inner, counters)), layered))

            return Denotation(j.coeffect, apply, j)
        if j.rule == "let":
            bound, body = kids
            live = body.index
            demand = inst.algebra.combine(live, bound.index)
            let_id = j.let_id

            def run(d, counters):
                def evaluate(inner):
                    counters[let_id] += 1
                    return bound(inner, counters)
                layered = inst.delta(live, bound.index, self.slice(d, demand))
                a = inst.fmap(live, evaluate, layered)
                context = self.extend(inst.mzip(live, live, self.slice(d, live), a), term.name)
                return body(context, counters)

            return Denotation(j.coeffect, run, j)
        if j.rule == "pair":
            left, right = kids
            return Denotation(j.coeffect, lambda d, counters: sv.Pair(
                left(self.slice(d, left.index), counters),
                right(self.slice(d, right.index), counters)), j)
        if j.rule in ("fst", "snd"):
            (inner,) = kids
            if j.rule == "fst":
                return Denotation(j.coeffect, lambda d, counters: inner(d, counters).fst, j)
            return Denotation(j.coeffect, lambda d, counters: inner(d, counters).snd, j)
        if j.rule == "if":
            cond, then, orelse = kids

            def branch(d, counters):
                if cond(self.slice(d, cond.index), counters).value:
                    site, chosen = "then", then
                else:
                    site, chosen = "else", orelse
                return self.cast(j, site, chosen(self.slice(d, chosen.index), counters))

            return Denotation(j.coeffect, branch, j)
        raise AlgebraMismatch(f"no coeffect denotation for rule {j.rule!r}")


def denote_coeffect(inst: IndexedComonad, j: CoeffectJudgment) -> Denotation:
    """⟦Γ ? F ⊢ e : τ⟧ : D F ⟦Γ⟧ → ⟦τ⟧; call it as den(context, counters)."""
    if inst.algebra != make_partiality_instance().algebra:
        raise AlgebraMismatch(f"coeffect judgments need the partiality comonad, not {inst.name}")
    return _CoeffectCompiler(inst).compile(j)


def run_coeffect(inst: IndexedComonad, j: CoeffectJudgment, env: Optional[sv.Env] = None):
    """Evaluate a coeffect denotation on a total context; returns (value, counters)."""
    den = denote_coeffect(inst, j)
    counters = collections.Counter()
    context = (env or sv.EMPTY_ENV) if j.coeffect else sv.ABSENT
    return den(context, counters), counters


# ---------- evaluation ----------

@dataclass
class ExecutionReport:
    value: Any
    writes: sv.Env
    store: sv.Env
    trace: Tuple[Tuple[str, Any], ...]
    effect: Any
    coeffect: Optional[bool] = None
    lets: List[Dict[str, Any]] = field(default_factory=list)
    instance: str = ""


def select_instance_name(sig: lc.Signature) -> str:
    kinds = sig.declared_kinds()
    if len(kinds) > 1:
        raise ValueError(f"program declares {' and '.join(kinds)}; pick one instance with --instance")
    return {"params": "reader", "regions": "memory", "tags": "trace"}.get(kinds[0] if kinds else "", "identity")


def _check_inputs(inst: IndexedMonad, sig: lc.Signature, effect, env: sv.Env, store: sv.Env):
    # trace indices are tag sequences, not token sets
    tokens = effect if isinstance(effect, frozenset) else frozenset()
    params = names_of(tokens, TokenKind.PARAM)
    reads = names_of(tokens, TokenKind.READ)
    if inst.name == "reader":
        if env.names != params:
            raise InputMismatch(f"environment gives {sorted(env.names)} but the program asks "
                                f"exactly {sorted(params)}")
    elif len(env):
        raise InputMismatch(f"instance {inst.name} takes no implicit parameters, got {sorted(env.names)}")
    if inst.name == "memory":
        declared = frozenset(name for name, _ in sig.regions)
        if not reads <= store.names:
            raise InputMismatch(f"store is missing {sorted(reads - store.names)}")
        if not store.names <= declared:
            raise InputMismatch(f"store holds undeclared regions {sorted(store.names - declared)}")
    elif len(store):
        raise InputMismatch(f"instance {inst.name} has no store, got {sorted(store.names)}")
    for name, value in env.items:
        if not lc.type_domain(sig.param_type(name)).contains(value):
            raise InputMismatch(f"{value} is not a value of {sig.param_type(name)} for {name}")
    for name, value in store.items:
        if not lc.type_domain(sig.region_type(name)).contains(value):
            raise InputMismatch(f"{value} is not a value of {sig.region_type(name)} for {name}")


def eval_program(program: Union[str, lc.Term], inputs: Optional[Dict[str, sv.Env]] = None,
                 sig: Optional[lc.Signature] = None,
                 instance: Union[None, str, IndexedMonad] = None,
                 config: Optional[dict] = None) -> ExecutionReport:
    """Infer, denote and run a closed program on the given env and store."""
    config = config or DEFAULT_CONFIG
    if isinstance(program, str):
        sig, term = lc.parse(program)
    else:
        term, sig = program, sig or lc.Signature()
    if instance is None:
        instance = select_instance_name(sig)
    inst = instance if isinstance(instance, IndexedMonad) else build_instance(
        instance, sig, config["trace"]["max_len"])
    inputs = inputs or {}
    env = inputs.get("env", sv.EMPTY_ENV)
    store = inputs.get("store", sv.EMPTY_ENV)

    j = infer_effect(sig, inst.algebra, {}, term)
    _check_inputs(inst, sig, j.effect, env, store)
    den = denote_effect(inst, j)
    value, writes, trace = inst.execute(den.index, den(sv.EMPTY_ENV), env, store)
    report = ExecutionReport(value, writes, store.override(writes), trace, j.effect, instance=inst.name)

    if not lc.uses_primitives(term):
        cj = infer_coeffect(sig, {}, erase_effect_latents(term), config["coeffects"]["lambda_split"])
        _, counters = run_coeffect(make_partiality_instance(), cj)
        report.coeffect = cj.coeffect
        report.lets = [{"id": entry.let_id, "name": entry.name, "live": entry.live,
                        "evaluations": counters[entry.let_id]} for entry in cj.liveness]
    logger.info("eval via %s: %s", inst.name, value)
    return report
