# core/calculus.py
"""The object language: signatures, types, terms, parser and pretty-printer."""
import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from core import values as sv
from core.effect_algebra import (EffectToken, TokenKind, implicit_param, index_tokens,
                                 out_token, read_token, write_token)
from core.errors import EffectTypeError, GradedError, ScopeError, SourceSyntaxError

Position = Optional[Tuple[int, int]]

KEYWORDS = frozenset({
    "param", "region", "tag", "let", "in", "if", "then", "else", "fst", "snd",
    "ask", "read", "write", "out", "unit", "true", "false",
})


# ---------- Types ----------

class ObjType:
    def __str__(self):
        return format_type(self)


@dataclass(frozen=True)
class TUnit(ObjType):
    pass


@dataclass(frozen=True)
class TBool(ObjType):
    pass


@dataclass(frozen=True)
class TIntMod(ObjType):
    m: int = sv.DEFAULT_MODULUS


@dataclass(frozen=True)
class TProd(ObjType):
    left: ObjType
    right: ObjType


@dataclass(frozen=True)
class TFun(ObjType):
    """σ → τ with a latent annotation.

    As parsed, `latent` is the tuple of tokens written in braces (or a bool
    for the coeffect flags t/f); after inference it is an algebra index.
    """
    arg: ObjType
    latent: object
    res: ObjType


BASE_TYPES = {"unit": TUnit(), "bool": TBool(), "int4": TIntMod(4)}


def format_latent(latent) -> str:
    if isinstance(latent, bool):
        return "{t}" if latent else "{f}"
    return "{" + ", ".join(index_tokens(latent)) + "}"


def format_type(t: ObjType) -> str:
    if isinstance(t, TUnit):
        return "unit"
    if isinstance(t, TBool):
        return "bool"
    if isinstance(t, TIntMod):
        return f"int{t.m}"
    if isinstance(t, TProd):
        return f"({format_type(t.left)}, {format_type(t.right)})"
    if isinstance(t, TFun):
        arg = format_type(t.arg)
        if isinstance(t.arg, TFun):
            arg = f"({arg})"
        return f"{arg} -> {format_latent(t.latent)} {format_type(t.res)}"
    raise TypeError(f"not an object type: {t!r}")


def is_first_order(t: ObjType) -> bool:
    if isinstance(t, TProd):
        return is_first_order(t.left) and is_first_order(t.right)
    return not isinstance(t, TFun)


def type_domain(t: ObjType) -> sv.Domain:
    """Domain of a first-order type."""
    if isinstance(t, TUnit):
        return sv.UNIT_DOMAIN
    if isinstance(t, TBool):
        return sv.BOOL_DOMAIN
    if isinstance(t, TIntMod):
        return sv.int_mod_domain(t.m)
    if isinstance(t, TProd):
        return sv.ProductDomain(type_domain(t.left), type_domain(t.right))
    raise EffectTypeError(f"{format_type(t)} has no first-order domain")


def map_latents(t: ObjType, fn) -> ObjType:
    """Rebuild a type with every latent annotation passed through `fn`."""
    if isinstance(t, TProd):
        return TProd(map_latents(t.left, fn), map_latents(t.right, fn))
    if isinstance(t, TFun):
        return TFun(map_latents(t.arg, fn), fn(t.latent), map_latents(t.res, fn))
    return t


# ---------- Signature ----------

@dataclass(frozen=True)
class Signature:
    params: Tuple[Tuple[str, ObjType], ...] = ()
    regions: Tuple[Tuple[str, ObjType], ...] = ()
    tags: Tuple[Tuple[str, ObjType], ...] = ()

    @classmethod
    def of(cls, params: Dict[str, Union[str, ObjType]] = None,
           regions: Dict[str, Union[str, ObjType]] = None,
           tags: Dict[str, Union[str, ObjType]] = None) -> "Signature":
        def norm(mapping):
            items = []
            for name, t in (mapping or {}).items():
                items.append((name, BASE_TYPES[t] if isinstance(t, str) else t))
            return tuple(sorted(items, key=lambda item: item[0]))

        sig = cls(norm(params), norm(regions), norm(tags))
        sig.validate()
        return sig

    def validate(self):
        seen = set()
        for name, _ in itertools.chain(self.params, self.regions, self.tags):
            if name in seen:
                raise ScopeError(f"name {name!r} is declared twice")
            if name in RESERVED:
                raise ScopeError(f"keyword {name!r} cannot be declared")
            seen.add(name)

    def param_type(self, name: str) -> ObjType:
        return self._lookup(self.params, name, "implicit parameter")

    def region_type(self, name: str) -> ObjType:
        return self._lookup(self.regions, name, "region")

    def tag_type(self, name: str) -> ObjType:
        return self._lookup(self.tags, name, "output tag")

    @staticmethod
    def _lookup(items, name, what):
        for key, t in items:
            if key == name:
                return t
        raise ScopeError(f"undeclared {what} {name!r}")

    def tokens(self) -> List[EffectToken]:
        tokens = [implicit_param(name) for name, _ in self.params]
        for name, _ in self.regions:
            tokens += [read_token(name), write_token(name)]
        tokens += [out_token(name) for name, _ in self.tags]
        return tokens

    def declared_kinds(self) -> List[str]:
        return [kind for kind in ("params", "regions", "tags") if getattr(self, kind)]

    def check_token(self, token: EffectToken):
        if token.kind is TokenKind.PARAM:
            self.param_type(token.name)
        elif token.kind in (TokenKind.READ, TokenKind.WRITE):
            self.region_type(token.name)
        else:
            self.tag_type(token.name)


# ---------- Terms ----------

@dataclass(frozen=True)
class Term:
    pos: Position = field(default=None, compare=False, repr=False, kw_only=True)

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Lam(Term):
    param: str
    param_type: ObjType
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Let(Term):
    name: str
    bound: Term
    body: Term


@dataclass(frozen=True)
class Const(Term):
    value: sv.SemValue


@dataclass(frozen=True)
class Pair(Term):
    first: Term
    second: Term


@dataclass(frozen=True)
class Fst(Term):
    expr: Term


@dataclass(frozen=True)
class Snd(Term):
    expr: Term


@dataclass(frozen=True)
class If(Term):
    cond: Term
    then: Term
    orelse: Term


@dataclass(frozen=True)
class Ask(Term):
    param: str


@dataclass(frozen=True)
class Read(Term):
    region: str


@dataclass(frozen=True)
class Write(Term):
    region: str
    expr: Term


@dataclass(frozen=True)
class Out(Term):
    tag: str
    expr: Term


PRIMITIVES = (Ask, Read, Write, Out)


def const_type(value: sv.SemValue) -> ObjType:
    if isinstance(value, sv.Unit):
        return TUnit()
    if isinstance(value, sv.Bool):
        return TBool()
    if isinstance(value, sv.IntMod):
        return TIntMod(value.m)
    if isinstance(value, sv.Pair):
        return TProd(const_type(value.fst), const_type(value.snd))
    raise EffectTypeError(f"{value} is not a first-order literal")


def children(term: Term) -> List[Term]:
    return [getattr(term, f.name) for f in dataclasses.fields(term)
            if isinstance(getattr(term, f.name), Term)]


def uses_primitives(term: Term) -> bool:
    if isinstance(term, PRIMITIVES):
        return True
    return any(uses_primitives(child) for child in children(term))


def free_vars(term: Term) -> FrozenSet[str]:
    if isinstance(term, Var):
        return frozenset([term.name])
    if isinstance(term, Lam):
        return free_vars(term.body) - {term.param}
    if isinstance(term, Let):
        return free_vars(term.bound) | (free_vars(term.body) - {term.name})
    result = frozenset()
    for child in children(term):
        result |= free_vars(child)
    return result


def _fresh(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    for i in itertools.count(1):
        candidate = f"{base}{i}"
        if candidate not in avoid:
            return candidate


def substitute(term: Term, name: str, replacement: Term) -> Term:
    """Capture-avoiding term[name := replacement]."""
    if isinstance(term, Var):
        return replacement if term.name == name else term
    if isinstance(term, (Lam, Let)):
        binder = term.param if isinstance(term, Lam) else term.name
        body = term.body
        if isinstance(term, Let):
            bound = substitute(term.bound, name, replacement)
        if binder != name:
            if binder in free_vars(replacement):
                fresh = _fresh(binder, free_vars(replacement) | free_vars(body) | {name})
                body = substitute(body, binder, Var(fresh))
                binder = fresh
            body = substitute(body, name, replacement)
        if isinstance(term, Lam):
            return dataclasses.replace(term, param=binder, body=body)
        return dataclasses.replace(term, name=binder, bound=bound, body=body)
    updates = {f.name: substitute(getattr(term, f.name), name, replacement)
               for f in dataclasses.fields(term) if isinstance(getattr(term, f.name), Term)}
    return dataclasses.replace(term, **updates) if updates else term


def check_scope(sig: Signature, term: Term, bound: FrozenSet[str] = frozenset()):
    """Every variable bound, every primitive and annotation declared."""
    try:
        if isinstance(term, Var):
            if term.name not in bound:
                raise ScopeError(f"unbound variable {term.name!r}")
        elif isinstance(term, Lam):
            _check_type_scope(sig, term.param_type)
            check_scope(sig, term.body, bound | {term.param})
        elif isinstance(term, Let):
            check_scope(sig, term.bound, bound)
            check_scope(sig, term.body, bound | {term.name})
        else:
            if isinstance(term, Ask):
                sig.param_type(term.param)
            elif isinstance(term, (Read, Write)):
                sig.region_type(term.region)
            elif isinstance(term, Out):
                sig.tag_type(term.tag)
            for child in children(term):
                check_scope(sig, child, bound)
    except ScopeError as exc:
        if exc.position is None:
            exc.position = term.pos
        raise


def _check_type_scope(sig: Signature, t: ObjType):
    if isinstance(t, TProd):
        _check_type_scope(sig, t.left)
        _check_type_scope(sig, t.right)
    elif isinstance(t, TFun):
        _check_type_scope(sig, t.arg)
        _check_type_scope(sig, t.res)
        if not isinstance(t.latent, bool):
            for token in t.latent:
                sig.check_token(token)


# ---------- Concrete syntax ----------

GRAMMAR = r"""
    start: decl* term

    decl: "param" NAME ":" base ";"    -> param_decl
        | "region" NAME ":" base ";"   -> region_decl
        | "tag" NAME ":" base ";"      -> tag_decl

    ?term: stmt
         | stmt ";" term               -> seq

    ?stmt: "\\" NAME ":" type "." term        -> lam
         | "let" NAME "=" term "in" term      -> let
         | "if" term "then" term "else" term  -> if_
         | app

    ?app: atom
        | app atom                     -> app

    ?atom: NAME                        -> var
         | "unit"                      -> unit_lit
         | "true"                      -> true_lit
         | "false"                     -> false_lit
         | DIGIT                       -> digit_lit
         | "(" term "," term ")"       -> pair
         | "fst" atom                  -> fst
         | "snd" atom                  -> snd
         | "ask" NAME                  -> ask
         | "read" NAME                 -> read
         | "write" NAME atom           -> write
         | "out" NAME atom             -> out
         | "(" term ")"

    ?type: atype
         | atype "->" "{" effects "}" type   -> arrow

    ?atype: base
          | "(" type "," type ")"      -> prod_type
          | "(" type ")"

    base: "unit"                       -> unit_type
        | "bool"                       -> bool_type
        | "int4"                       -> int_type

    effects: (efftok ("," efftok)*)?

    efftok: "rd" NAME                  -> rd_tok
          | "wr" NAME                  -> wr_tok
          | "ip" NAME                  -> ip_tok
          | "out" NAME                 -> out_tok
          | "t"                        -> live_flag
          | "f"                        -> dead_flag

    NAME: /@NAME@/
    DIGIT: /[0-9]/
    COMMENT: /--[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

# Keywords and base type names never lex as NAME, whatever the parser state.
RESERVED = KEYWORDS | frozenset(BASE_TYPES)
NAME_PATTERN = (r"(?!(?:" + "|".join(sorted(RESERVED)) + r")(?![a-zA-Z0-9_']))"
                r"[a-zA-Z_][a-zA-Z0-9_']*")
GRAMMAR = GRAMMAR.replace("@NAME@", NAME_PATTERN)

_parser = Lark(GRAMMAR, parser="lalr", propagate_positions=True)


def _pos(meta) -> Position:
    if getattr(meta, "empty", True):
        return None
    return (meta.line, meta.column)


@v_args(meta=True)
class _TermBuilder(Transformer):
    def start(self, meta, items):
        decls, term = items[:-1], items[-1]
        grouped = {"param": {}, "region": {}, "tag": {}}
        for kind, name, t, pos in decls:
            if any(name in names for names in grouped.values()):
                raise ScopeError(f"name {name!r} is declared twice", pos)
            grouped[kind][name] = t
        sig = Signature.of(params=grouped["param"], regions=grouped["region"], tags=grouped["tag"])
        return sig, term

    def param_decl(self, meta, items):
        return ("param", str(items[0]), items[1], _pos(meta))

    def region_decl(self, meta, items):
        return ("region", str(items[0]), items[1], _pos(meta))

    def tag_decl(self, meta, items):
        return ("tag", str(items[0]), items[1], _pos(meta))

    def unit_type(self, meta, items):
        return TUnit()

    def bool_type(self, meta, items):
        return TBool()

    def int_type(self, meta, items):
        return TIntMod(4)

    def prod_type(self, meta, items):
        return TProd(items[0], items[1])

    def arrow(self, meta, items):
        return TFun(items[0], items[1], items[2])

    def effects(self, meta, items):
        items = [item for item in items if item is not None]
        flags = [item for item in items if isinstance(item, bool)]
        if flags:
            if len(items) != 1:
                raise EffectTypeError("a coeffect annotation is a single t or f", _pos(meta))
            return flags[0]
        return tuple(items)

    def rd_tok(self, meta, items):
        return read_token(str(items[0]))

    def wr_tok(self, meta, items):
        return write_token(str(items[0]))

    def ip_tok(self, meta, items):
        return implicit_param(str(items[0]))

    def out_tok(self, meta, items):
        return out_token(str(items[0]))

    def live_flag(self, meta, items):
        return True

    def dead_flag(self, meta, items):
        return False

    def seq(self, meta, items):
        return Let("_", items[0], items[1], pos=_pos(meta))

    def lam(self, meta, items):
        return Lam(str(items[0]), items[1], items[2], pos=_pos(meta))

    def let(self, meta, items):
        return Let(str(items[0]), items[1], items[2], pos=_pos(meta))

    def if_(self, meta, items):
        return If(items[0], items[1], items[2], pos=_pos(meta))

    def app(self, meta, items):
        return App(items[0], items[1], pos=_pos(meta))

    def var(self, meta, items):
        return Var(str(items[0]), pos=_pos(meta))

    def unit_lit(self, meta, items):
        return Const(sv.UNIT, pos=_pos(meta))

    def true_lit(self, meta, items):
        return Const(sv.TRUE, pos=_pos(meta))

    def false_lit(self, meta, items):
        return Const(sv.FALSE, pos=_pos(meta))

    def digit_lit(self, meta, items):
        return Const(sv.int_mod(int(items[0])), pos=_pos(meta))

    def pair(self, meta, items):
        return Pair(items[0], items[1], pos=_pos(meta))

    def fst(self, meta, items):
        return Fst(items[0], pos=_pos(meta))

    def snd(self, meta, items):
        return Snd(items[0], pos=_pos(meta))

    def ask(self, meta, items):
        return Ask(str(items[0]), pos=_pos(meta))

    def read(self, meta, items):
        return Read(str(items[0]), pos=_pos(meta))

    def write(self, meta, items):
        return Write(str(items[0]), items[1], pos=_pos(meta))

    def out(self, meta, items):
        return Out(str(items[0]), items[1], pos=_pos(meta))


def _end_position(source: str) -> Tuple[int, int]:
    lines = source.split("\n")
    return len(lines), len(lines[-1]) + 1


def parse(source: str) -> Tuple[Signature, Term]:
    """Parse a program (declarations followed by one term) and scope-check it."""
    try:
        tree = _parser.parse(source)
    except UnexpectedInput as exc:
        line = getattr(exc, "line", None)
        column = getattr(exc, "column", None)
        if line is None or line < 1:
            line, column = _end_position(source)
        expected = getattr(exc, "expected", None) or getattr(exc, "allowed", None) or ()
        raise SourceSyntaxError(line, column, [str(name) for name in expected]) from None
    try:
        sig, term = _TermBuilder().transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, GradedError):
            raise exc.orig_exc from None
        raise
    check_scope(sig, term)
    return sig, term


def parse_type(source: str, sig: Optional[Signature] = None) -> ObjType:
    """Parse a type by wrapping it in a trivial binder under `sig`'s declarations."""
    binder = Lam("x", TUnit(), Const(sv.UNIT))
    header = pretty_program(sig or Signature(), binder).rsplit("\n", 1)[:-1]
    _, term = parse("\n".join(header + [f"\\x:{source}. unit"]))
    return term.param_type


# ---------- Pretty printing ----------

_TERM, _APP, _ATOM = 0, 1, 2


def _level(term: Term) -> int:
    if isinstance(term, (Lam, Let, If)):
        return _TERM
    if isinstance(term, App):
        return _APP
    return _ATOM


def _pretty(term: Term, level: int) -> str:
    if isinstance(term, Var):
        text = term.name
    elif isinstance(term, Const):
        text = str(term.value)
    elif isinstance(term, Lam):
        text = f"\\{term.param}:{format_type(term.param_type)}. {_pretty(term.body, _TERM)}"
    elif isinstance(term, Let):
        text = f"let {term.name} = {_pretty(term.bound, _TERM)} in {_pretty(term.body, _TERM)}"
    elif isinstance(term, If):
        text = (f"if {_pretty(term.cond, _TERM)} then {_pretty(term.then, _TERM)} "
                f"else {_pretty(term.orelse, _TERM)}")
    elif isinstance(term, App):
        text = f"{_pretty(term.fn, _APP)} {_pretty(term.arg, _ATOM)}"
    elif isinstance(term, Pair):
        text = f"({_pretty(term.first, _TERM)}, {_pretty(term.second, _TERM)})"
    elif isinstance(term, Fst):
        text = f"fst {_pretty(term.expr, _ATOM)}"
    elif isinstance(term, Snd):
        text = f"snd {_pretty(term.expr, _ATOM)}"
    elif isinstance(term, Ask):
        text = f"ask {term.param}"
    elif isinstance(term, Read):
        text = f"read {term.region}"
    elif isinstance(term, Write):
        text = f"write {term.region} {_pretty(term.expr, _ATOM)}"
    elif isinstance(term, Out):
        text = f"out {term.tag} {_pretty(term.expr, _ATOM)}"
    else:
        raise TypeError(f"not a term: {term!r}")
    if _level(term) < level:
        return f"({text})"
    return text


def pretty(term: Term) -> str:
    """Canonical, parseable text of a term with minimal parentheses."""
    return _pretty(term, _TERM)


def pretty_program(sig: Signature, term: Term) -> str:
    lines = []
    for keyword, items in (("param", sig.params), ("region", sig.regions), ("tag", sig.tags)):
        for name, t in items:
            lines.append(f"{keyword} {name} : {format_type(t)};")
    lines.append(pretty(term))
    return "\n".join(lines)
