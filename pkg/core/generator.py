# core/generator.py
"""Hypothesis strategies for closed, well-typed programs of each instance.

Terms are drawn type-directed. Function values enter through λ-bound
parameters carrying written latent annotations (wider than the argument's
own latent where the instance has an order, so application sites coerce),
let-bound λs applied any number of times, and conditionals choosing between
λs. Trace programs ration their outputs: a function's latent trace is paid
once per application, so every index stays within the trace bound.
"""
from typing import Dict, Optional, Tuple

from hypothesis import strategies as st

from core import calculus as lc
from core import values as sv
from core.effect_algebra import out_token
from core.effect_inference import infer_effect
from core.indexed_monad import build_instance

FIRST_ORDER = (lc.TUnit(), lc.TBool(), lc.TIntMod(4))

GENERATOR_SIGNATURES = {
    "reader": {"params": {"p": "int4", "q": "bool"}},
    "memory": {"regions": {"r": "int4", "s": "bool"}},
    "trace": {"tags": {"a": "unit", "b": "int4"}},
    "identity": {},
}


def generator_signature(instance: str) -> lc.Signature:
    return lc.Signature.of(**GENERATOR_SIGNATURES[instance])


def written_latent(index) -> tuple:
    """Tokens that denote `index` when written on an arrow."""
    if isinstance(index, frozenset):
        return tuple(sorted(index, key=str))
    return tuple(out_token(tag) for tag in index)


def written_type(t: lc.ObjType) -> lc.ObjType:
    return lc.map_latents(t, written_latent)


def constants(t: lc.ObjType) -> st.SearchStrategy:
    if isinstance(t, lc.TUnit):
        return st.just(lc.Const(sv.UNIT))
    if isinstance(t, lc.TBool):
        return st.sampled_from((lc.Const(sv.FALSE), lc.Const(sv.TRUE)))
    if isinstance(t, lc.TIntMod):
        return st.integers(0, t.m - 1).map(lambda k: lc.Const(sv.IntMod(k, t.m)))
    return st.builds(lc.Pair, constants(t.left), constants(t.right))


class _Builder:
    """Draws one program; `spent` is the trace length committed so far."""

    def __init__(self, draw, sig: lc.Signature, instance: str, max_depth: int = 4, max_outs: int = 3):
        self.draw = draw
        self.sig = sig
        self.instance = instance
        self.alg = build_instance(instance, sig, max_outs).algebra
        self.max_depth = max_depth
        self.max_outs = max_outs
        self.spent = 0
        # function variable -> outputs emitted per application
        self.costs: Dict[str, int] = {}
        self.counter = 0

    # ---------- helpers ----------

    def fresh(self, base: str = "x") -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def choose(self, options):
        return self.draw(st.sampled_from(options))

    def first_order(self, depth: int) -> lc.ObjType:
        if depth > 1 and self.draw(st.integers(0, 6)) == 0:
            return lc.TProd(self.choose(FIRST_ORDER), self.choose(FIRST_ORDER))
        return self.choose(FIRST_ORDER)

    def constant(self, t: lc.ObjType) -> lc.Term:
        return self.draw(constants(t))

    @property
    def room(self) -> int:
        return self.max_outs - self.spent

    def affordable(self, name: str) -> bool:
        return self.costs.get(name, 0) <= self.room

    def widen(self, latent):
        """A written annotation above `latent`; only ordered algebras can coerce."""
        if self.instance in ("reader", "memory") and self.alg.generators:
            extra = self.draw(st.frozensets(st.sampled_from(self.alg.generators)))
            return latent | extra
        return latent

    def closure(self, arg_type, res_type, ctx, depth) -> Tuple[lc.Lam, lc.TFun, int]:
        """A λ with its inferred type and the outputs one application emits."""
        param = self.fresh()
        saved = self.spent
        body = self.term(res_type, {**ctx, param: arg_type}, depth + 1)
        cost, self.spent = self.spent - saved, saved
        lam = lc.Lam(param, written_type(arg_type), body)
        return lam, infer_effect(self.sig, self.alg, ctx, lam).type, cost

    def _primitive(self, t, ctx, depth) -> Optional[lc.Term]:
        sig = self.sig
        if self.instance == "reader":
            names = [name for name, pt in sig.params if pt == t]
            return lc.Ask(self.choose(names)) if names else None
        if self.instance == "memory":
            options = [("read", name, rt) for name, rt in sig.regions if rt == t]
            if t == lc.TUnit():
                options += [("write", name, rt) for name, rt in sig.regions]
            if not options:
                return None
            kind, name, rt = self.choose(options)
            if kind == "read":
                return lc.Read(name)
            return lc.Write(name, self.term(rt, ctx, depth + 1))
        if self.instance == "trace" and t == lc.TUnit() and self.room >= 1 and sig.tags:
            name, tt = self.choose(sig.tags)
            self.spent += 1
            return lc.Out(name, self.term(tt, ctx, depth + 1))
        return None

    # ---------- terms ----------

    def term(self, t: lc.ObjType, ctx: Dict[str, lc.ObjType], depth: int = 0) -> lc.Term:
        leaves = [name for name, vt in ctx.items() if vt == t]
        calls = [name for name, vt in ctx.items()
                 if isinstance(vt, lc.TFun) and vt.res == t and self.affordable(name)]
        options = ["const"] + (["var"] if leaves else [])
        if depth < self.max_depth:
            options += (["call"] if calls else []) + ["prim", "proj", "let", "redex", "higher", "let_fn"]
            if isinstance(t, lc.TProd):
                options.append("pair")
            if self.instance != "trace":
                options += ["if", "if_fn"]
        kind = self.choose(options)

        if kind == "var":
            return lc.Var(self.choose(leaves))
        if kind == "call":
            name = self.choose(calls)
            self.spent += self.costs.get(name, 0)
            return lc.App(lc.Var(name), self.term(ctx[name].arg, ctx, depth + 1))
        if kind == "prim":
            prim = self._primitive(t, ctx, depth)
            if prim is not None:
                return prim
        if kind == "pair":
            return lc.Pair(self.term(t.left, ctx, depth + 1), self.term(t.right, ctx, depth + 1))
        if kind == "proj":
            other = self.first_order(depth)
            if self.draw(st.booleans()):
                return lc.Snd(self.term(lc.TProd(other, t), ctx, depth + 1))
            return lc.Fst(self.term(lc.TProd(t, other), ctx, depth + 1))
        if kind == "let":
            bound_type = self.first_order(depth)
            name = self.fresh()
            bound = self.term(bound_type, ctx, depth + 1)
            return lc.Let(name, bound, self.term(t, {**ctx, name: bound_type}, depth + 1))
        if kind == "redex":
            arg_type = self.first_order(depth)
            name = self.fresh()
            body = self.term(t, {**ctx, name: arg_type}, depth + 1)
            return lc.App(lc.Lam(name, arg_type, body), self.term(arg_type, ctx, depth + 1))
        if kind == "higher":
            return self.higher_order(t, ctx, depth)
        if kind == "let_fn":
            fn = self.fresh("f")
            lam, fn_type, self.costs[fn] = self.closure(self.first_order(depth), t, ctx, depth)
            return lc.Let(fn, lam, self.term(t, {**ctx, fn: fn_type}, depth + 1))
        if kind == "if":
            return lc.If(self.term(lc.TBool(), ctx, depth + 1), self.term(t, ctx, depth + 1),
                         self.term(t, ctx, depth + 1))
        if kind == "if_fn":
            return self.choose_function(t, ctx, depth)
        return self.constant(t)

    def higher_order(self, t, ctx, depth) -> lc.Term:
        """(λg:σ →{L} τ. e) λ, where L may lie above the λ's own latent."""
        lam, lam_type, cost = self.closure(self.first_order(depth), t, ctx, depth)
        g = self.fresh("g")
        g_type = lc.TFun(lam_type.arg, self.widen(lam_type.latent), t)
        self.costs[g] = cost
        body = self.term(t, {**ctx, g: g_type}, depth + 1)
        return lc.App(lc.Lam(g, written_type(g_type), body), lam)

    def choose_function(self, t, ctx, depth) -> lc.Term:
        """A conditional between two λs, applied directly or let-bound first."""
        arg_type = self.first_order(depth)
        left, left_type, _ = self.closure(arg_type, t, ctx, depth)
        right, right_type, _ = self.closure(arg_type, t, ctx, depth)
        chooser = lc.If(self.term(lc.TBool(), ctx, depth + 1), left, right)
        if self.draw(st.booleans()):
            return lc.App(chooser, self.term(arg_type, ctx, depth + 1))
        fn = self.fresh("f")
        fn_type = lc.TFun(arg_type, self.alg.join(left_type.latent, right_type.latent), t)
        return lc.Let(fn, chooser, self.term(t, {**ctx, fn: fn_type}, depth + 1))

    def pure_closed(self, t: lc.ObjType, depth: int = 0) -> lc.Term:
        """A closed term that needs no context: constants under pairs, projections and ifs."""
        kind = self.choose(["const", "pair", "proj", "if", "let"] if depth < 2 else ["const"])
        if kind == "pair" and isinstance(t, lc.TProd):
            return lc.Pair(self.pure_closed(t.left, depth + 1), self.pure_closed(t.right, depth + 1))
        if kind == "proj":
            return lc.Fst(lc.Pair(self.pure_closed(t, depth + 1), self.constant(self.first_order(0))))
        if kind == "if":
            return lc.If(self.constant(lc.TBool()), self.pure_closed(t, depth + 1),
                         self.pure_closed(t, depth + 1))
        if kind == "let":
            return lc.Let(self.fresh("y"), self.constant(self.first_order(0)), self.pure_closed(t, depth + 1))
        return self.constant(t)


@st.composite
def programs(draw, instance: str, sig: Optional[lc.Signature] = None, max_depth: int = 4):
    """Closed programs of first-order type over `instance`'s signature."""
    builder = _Builder(draw, sig or generator_signature(instance), instance, max_depth)
    return builder.term(builder.first_order(2), {}, 0)


@st.composite
def beta_redexes(draw, instance: str):
    """(λx.e) v paired with e[x := v]; when x is function-typed, v is a λ.

    A function-typed x is annotated with exactly v's latent, so both sides
    have the same effect.
    """
    builder = _Builder(draw, generator_signature(instance), instance)
    name = builder.fresh()
    if draw(st.booleans()):
        binder_type = builder.first_order(2)
        value = builder.constant(binder_type)
    else:
        value, binder_type, builder.costs[name] = builder.closure(
            builder.first_order(1), builder.first_order(1), {}, 1)
    body = builder.term(builder.first_order(2), {name: binder_type}, 1)
    redex = lc.App(lc.Lam(name, written_type(binder_type), body), value)
    return redex, lc.substitute(body, name, value)


@st.composite
def dead_lets(draw, instance: str = "identity"):
    """`let y = e1 in e2` where e2 needs no context, so y is dead."""
    builder = _Builder(draw, generator_signature(instance), instance)
    name = builder.fresh("y")
    bound = builder.term(builder.first_order(2), {}, 1)
    return lc.Let(name, bound, builder.pure_closed(builder.first_order(1)))
