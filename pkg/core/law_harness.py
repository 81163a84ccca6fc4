# core/law_harness.py
"""Pointwise law checking for indexed monads and comonads.

Every law is checked over the index carrier and over the enumerated
computations at each index. When a case is too large for the budget the
harness samples it with a seeded RNG and reports `sampled-pass` instead of
`pass`. Errors raised while evaluating a law become failing verdicts.
"""
import itertools
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from config import DEFAULT_CONFIG
from core import calculus as lc
from core import values as sv
from core.effect_algebra import check_algebra_laws, format_index, write_token
from core.errors import EnumerationBudgetExceeded, GradedError, IndexOverflow
from core.indexed_comonad import IndexedComonad, derive_mzip_join, make_partiality_instance
from core.indexed_monad import IndexedMonad, MemoryMonad, TraceMonad, build_instance
from core.mutants import COMONAD_MUTANTS, MONAD_MUTANTS
from core.reports import LawReport, Verdict, failure, render

logger = logging.getLogger(__name__)

LAW_INSTANCES = ("reader", "memory", "trace", "identity", "partiality")


def _functions(domain: sv.Domain) -> sv.FunctionSpace:
    return sv.FunctionSpace(domain, domain, lambda table: table, "→")


def _equal(lhs, rhs) -> bool:
    return lhs == rhs


class LawRunner:
    """Runs one law over a list of (indices, input domain) cases."""

    def __init__(self, instance: str, budget: int = 10 ** 6, seed: int = 0, samples: int = 24):
        self.instance = instance
        self.budget = budget
        self.seed = seed
        self.samples = samples

    def check(self, law: str, cases: Iterable[Tuple[tuple, sv.Domain]],
              holds: Callable[..., Tuple[Any, Any]], compare: Callable[[Any, Any], bool] = _equal,
              required: bool = True) -> LawReport:
        rng = random.Random(f"{self.seed}:{self.instance}:{law}")
        cases = list(cases)
        per_case = max(1, self.budget // max(1, len(cases)))
        sizes = {"cases": len(cases), "checked": 0}
        sampled = False
        inputs: tuple = ()
        try:
            for indices, domain in cases:
                if domain.size() <= per_case:
                    values = domain.elements()
                else:
                    sampled = True
                    values = (domain.sample(rng) for _ in range(self.samples))
                for value in values:
                    inputs = tuple(indices) + (value,)
                    sizes["checked"] += 1
                    lhs, rhs = holds(*inputs)
                    if not compare(lhs, rhs):
                        logger.info("%s: %s fails at %s", self.instance, law, render(inputs))
                        return failure(law, self.instance, _shown(inputs), lhs, rhs, sizes, required)
        except EnumerationBudgetExceeded as exc:
            logger.warning("%s: %s over budget: %s", self.instance, law, exc)
            return LawReport(law, self.instance, Verdict.BUDGET_EXCEEDED, sizes,
                             required=required, note=exc.message)
        except GradedError as exc:
            logger.info("%s: %s raised %s at %s", self.instance, law, exc.kind, render(inputs))
            report = failure(law, self.instance, _shown(inputs), f"{exc.kind}: {exc.message}",
                             "no error", sizes, required)
            report.note = "raised while evaluating the law"
            return report
        if sampled:
            logger.warning("%s: %s checked by sampling (%d samples per large case)",
                           self.instance, law, self.samples)
        verdict = Verdict.SAMPLED_PASS if sampled else Verdict.PASS
        logger.info("%s: %s %s", self.instance, law, verdict.value)
        return LawReport(law, self.instance, verdict, sizes, required=required)


def _shown(inputs: tuple) -> tuple:
    shown = []
    for item in inputs:
        if isinstance(item, (frozenset, bool)) or (isinstance(item, tuple) and all(isinstance(x, str) for x in item)):
            shown.append(format_index(item))
        else:
            shown.append(item)
    return tuple(shown)


def _combines(alg, *indices) -> bool:
    try:
        alg.combine_all(*indices)
        return True
    except IndexOverflow:
        return False


def _index_tuples(alg, arity: int, limit: int, rng: random.Random) -> List[tuple]:
    carrier = alg.carrier
    if len(carrier) ** arity <= limit:
        return list(itertools.product(carrier, repeat=arity))
    return [tuple(rng.choice(carrier) for _ in range(arity)) for _ in range(limit)]


# ---------- indexed monads ----------

def check_indexed_monad_laws(inst: IndexedMonad, budget: int = 10 ** 6, seed: int = 0,
                             samples: int = 24, value_domain: Optional[sv.Domain] = None,
                             index_limit: int = 4096) -> List[LawReport]:
    """Unit, associativity, functor, ι and strength laws for one instance."""
    alg = inst.algebra
    A = value_domain or sv.int_mod_domain()
    B = sv.BOOL_DOMAIN
    T = inst.carrier_of
    unit = alg.unit
    runner = LawRunner(inst.name, budget, seed, samples)
    rng = random.Random(f"{seed}:{inst.name}:indices")
    singles = [(F,) for F in alg.carrier]
    pairs = [p for p in _index_tuples(alg, 2, index_limit, rng) if _combines(alg, *p)]
    triples = [p for p in _index_tuples(alg, 3, index_limit, rng) if _combines(alg, *p)]
    reports = []

    reports.append(runner.check(
        "left-unit", [((G,), T(G, A)) for (G,) in singles],
        lambda G, t: (inst.mu(unit, G, inst.eta(t)), t)))
    reports.append(runner.check(
        "right-unit", [((F,), T(F, A)) for (F,) in singles],
        lambda F, t: (inst.mu(F, unit, inst.fmap(F, inst.eta, t)), t)))
    reports.append(runner.check(
        "associativity", [((F, G, H), T(F, T(G, T(H, A)))) for F, G, H in triples],
        lambda F, G, H, t: (
            inst.mu(alg.combine(F, G), H, inst.mu(F, G, t)),
            inst.mu(F, alg.combine(G, H), inst.fmap(F, lambda u: inst.mu(G, H, u), t)))))
    reports.append(runner.check(
        "functor-identity", [((F,), T(F, A)) for (F,) in singles],
        lambda F, t: (inst.fmap(F, lambda v: v, t), t)))
    reports.append(runner.check(
        "functor-composition",
        [((F,), sv.TupleDomain((T(F, A), _functions(A), _functions(A)))) for (F,) in singles],
        lambda F, args: (inst.fmap(F, lambda v: args[1](args[2](v)), args[0]),
                         inst.fmap(F, args[1], inst.fmap(F, args[2], args[0])))))
    reports.append(runner.check(
        "iota-identity", [((X,), T(X, A)) for (X,) in singles],
        lambda X, t: (inst.iota(X, X, t), t)))

    if alg.is_lattice:
        chains = [(X, Y, Z) for X, Y, Z in _index_tuples(alg, 3, index_limit, rng)
                  if alg.leq(X, Y) and alg.leq(Y, Z)]
        steps = [(X, Y) for X, Y in pairs if alg.leq(X, Y)]
        reports.append(runner.check(
            "iota-composition", [((X, Y, Z), T(X, A)) for X, Y, Z in chains],
            lambda X, Y, Z, t: (inst.iota(Y, Z, inst.iota(X, Y, t)), inst.iota(X, Z, t))))
        reports.append(runner.check(
            "iota-naturality",
            [((X, Y), sv.TupleDomain((T(X, A), _functions(A)))) for X, Y in steps],
            lambda X, Y, args: (inst.iota(X, Y, inst.fmap(X, args[1], args[0])),
                                inst.fmap(Y, args[1], inst.iota(X, Y, args[0])))))
        squares = [(X, X2, Y, Y2) for (X, X2), (Y, Y2) in itertools.product(steps, repeat=2)]
        if len(squares) > index_limit:
            squares = rng.sample(squares, index_limit)
        reports.append(runner.check(
            "iota-mu", [((X, X2, Y, Y2), T(X, T(Y, A))) for X, X2, Y, Y2 in squares],
            lambda X, X2, Y, Y2, t: (
                inst.iota(alg.combine(X, Y), alg.combine(X2, Y2), inst.mu(X, Y, t)),
                inst.mu(X2, Y2, inst.iota(X, X2, inst.fmap(X, lambda u: inst.iota(Y, Y2, u), t)))),
            required=False))

    reports.append(runner.check(
        "strength-unit", [((), sv.TupleDomain((B, A)))],
        lambda ab: (inst.strength(unit, ab[0], inst.eta(ab[1])), inst.eta(sv.Pair(ab[0], ab[1])))))
    reports.append(runner.check(
        "strength-mu", [((F, G), sv.TupleDomain((B, T(F, T(G, A))))) for F, G in pairs],
        lambda F, G, args: (
            inst.strength(alg.combine(F, G), args[0], inst.mu(F, G, args[1])),
            inst.mu(F, G, inst.fmap(F, lambda p: inst.strength(G, p.fst, p.snd),
                                    inst.strength(F, args[0], args[1]))))))
    reports.append(runner.check(
        "strength-projection", [((F,), sv.TupleDomain((B, T(F, A)))) for (F,) in singles],
        lambda F, args: (inst.fmap(F, lambda p: p.snd, inst.strength(F, args[0], args[1])), args[1])))

    if isinstance(inst, MemoryMonad):
        reports.append(_check_memory_sequencing(inst, runner, pairs, A))
    return reports


def _check_memory_sequencing(inst: MemoryMonad, runner: LawRunner, pairs, A) -> LawReport:
    """μ agrees with running both layers against one global store."""
    alg = inst.algebra
    everything = sv.EnvDomain.of({name: lc.type_domain(t) for name, t in inst.sig.regions})
    T = inst.carrier_of

    def holds(F, G, args):
        t, store = args
        combined = alg.combine(F, G)
        value, writes = inst.mu(F, G, t)(store.restrict(inst.reads_domain(combined).names))
        k, first = t(store.restrict(inst.reads_domain(F).names))
        middle = store.override(first)
        direct_value, second = k(middle.restrict(inst.reads_domain(G).names))
        return (value, store.override(writes)), (direct_value, middle.override(second))

    return runner.check("sequencing-global-state",
                        [((F, G), sv.TupleDomain((T(F, T(G, A)), everything))) for F, G in pairs],
                        holds)


def check_fiber_not_monad(inst: IndexedMonad, F, budget: int = 10 ** 6,
                          domain_limit: int = 4) -> LawReport:
    """Search for a unit making the single fiber T F a monad.

    The fiber's multiplication is μ_{F,F} followed by ι back to F, so the
    search only applies where F ⊗ F ⊑ F. Candidate units A → T F A are
    enumerated over A = bool; the left unit law is also searched when T F A
    has at most `domain_limit` elements.
    """
    alg = inst.algebra
    law = f"fiber-monad {format_index(F)}"
    A = sv.BOOL_DOMAIN
    try:
        FF = alg.combine(F, F)
        if FF != F and not (alg.is_lattice and alg.leq(FF, F)):
            return LawReport(law, inst.name, Verdict.INAPPLICABLE, required=False,
                             note=f"{format_index(FF)} is not below {format_index(F)}")
    except IndexOverflow:
        return LawReport(law, inst.name, Verdict.INAPPLICABLE, required=False,
                         note="F ⊗ F overflows the index bound")

    def join(t):
        return inst.iota(FF, F, inst.mu(F, F, t)) if FF != F else inst.mu(F, F, t)

    TFA = inst.precise_carrier(F, A)
    candidates = sv.FunctionSpace(A, TFA, lambda table: table, "→")
    sizes = {"candidates": candidates.size(), "carrier": TFA.size()}
    if candidates.size() * max(1, TFA.size()) > budget:
        return LawReport(law, inst.name, Verdict.BUDGET_EXCEEDED, sizes, required=False,
                         note="candidate units exceed the budget")
    computations = list(TFA.elements())

    def right_unit(eta) -> bool:
        try:
            return all(join(inst.fmap(F, eta, t)) == t for t in computations)
        except GradedError:
            return False

    found = None
    for eta in candidates.elements():
        if right_unit(eta):
            found = eta
            break

    left_checked = TFA.size() <= domain_limit
    if found is not None and left_checked:
        outer = sv.FunctionSpace(TFA, inst.precise_carrier(F, TFA), lambda table: table, "→")
        sizes["outer_candidates"] = outer.size()
        if outer.size() * len(computations) > budget:
            left_checked = False
        else:
            found = next((eta2 for eta2 in outer.elements()
                          if all(join(eta2(t)) == t for t in computations)), None)

    if found is None:
        logger.info("%s: no unit makes the fiber at %s a monad", inst.name, format_index(F))
        return LawReport(law, inst.name, Verdict.NO_STRUCTURE, sizes, required=False,
                         note="every candidate unit breaks the right unit law")
    witness = ", ".join(f"{a} ↦ {found(a)}" for a in A.elements())
    note = f"unit {witness}" + ("" if left_checked else "; left unit not searched")
    return LawReport(law, inst.name, Verdict.STRUCTURE_FOUND, sizes, required=False, note=note)


# ---------- indexed comonads ----------

def check_indexed_comonad_laws(inst: IndexedComonad, budget: int = 10 ** 6, seed: int = 0,
                               samples: int = 24, value_domain: Optional[sv.Domain] = None) -> List[LawReport]:
    alg = inst.algebra
    A = value_domain or sv.BOOL_DOMAIN
    D = inst.carrier_of
    runner = LawRunner(inst.name, budget, seed, samples)
    carrier = alg.carrier
    singles = [(F,) for F in carrier]
    pairs = list(itertools.product(carrier, repeat=2))
    triples = list(itertools.product(carrier, repeat=3))
    unit = alg.unit
    join = inst.join
    reports = []

    reports.append(runner.check(
        "counit-right", [((F,), D(F, A)) for (F,) in singles],
        lambda F, d: (inst.fmap(F, inst.epsilon, inst.delta(F, unit, d)), d)))
    reports.append(runner.check(
        "counit-left", [((F,), D(F, A)) for (F,) in singles],
        lambda F, d: (inst.epsilon(inst.delta(unit, F, d)), d)))
    reports.append(runner.check(
        "coassociativity", [((F, G, H), D(alg.combine_all(F, G, H), A)) for F, G, H in triples],
        lambda F, G, H, d: (
            inst.fmap(F, lambda x: inst.delta(G, H, x), inst.delta(F, alg.combine(G, H), d)),
            inst.delta(F, G, inst.delta(alg.combine(F, G), H, d)))))

    def reassociate(p):
        return sv.Pair(sv.Pair(p.fst, p.snd.fst), p.snd.snd)

    reports.append(runner.check(
        "mzip-associativity",
        [((F, G, H), sv.TupleDomain((D(F, A), D(G, A), D(H, A)))) for F, G, H in triples],
        lambda F, G, H, ds: (
            inst.mzip(join(F, G), H, inst.mzip(F, G, ds[0], ds[1]), ds[2]),
            inst.fmap(join(F, join(G, H)), reassociate,
                      inst.mzip(F, join(G, H), ds[0], inst.mzip(G, H, ds[1], ds[2]))))))
    reports.append(runner.check(
        "mzip-naturality",
        [((F, G), sv.TupleDomain((D(F, A), D(G, A), _functions(A), _functions(A)))) for F, G in pairs],
        lambda F, G, args: (
            inst.fmap(join(F, G), lambda p: sv.Pair(args[2](p.fst), args[3](p.snd)),
                      inst.mzip(F, G, args[0], args[1])),
            inst.mzip(F, G, inst.fmap(F, args[2], args[0]), inst.fmap(G, args[3], args[1])))))
    reports.append(runner.check(
        "mzip-typing",
        [((F, G), sv.TupleDomain((D(F, A), D(G, A)))) for F, G in pairs],
        lambda F, G, ds: (inst.mzip(F, G, ds[0], ds[1]), D(join(F, G), sv.ProductDomain(A, A))),
        compare=lambda result, target: target.contains(result)))
    return reports


def check_partiality_has_no_counit(domain: sv.Domain = sv.BOOL_DOMAIN) -> LawReport:
    """The unindexed functor 1 + A has no counit ε : 1 + A → A.

    With δ the duplication map, ε ∘ δ = id already forces ε(absent) = absent,
    which is not a value of A; naturality is checked too so the search does
    not depend on that choice of δ alone.
    """
    law = "no-total-counit"
    points = [sv.ABSENT] + list(domain.elements())
    plus_one = sv.FiniteDomain(f"1+{domain.label()}", tuple(points))
    candidates = sv.FunctionSpace(plus_one, domain, lambda table: table, "→")
    functions = list(_functions(domain).elements())

    def fmap(f, d):
        return d if d == sv.ABSENT else f(d)

    def is_counit(eps) -> bool:
        if any(eps(d) != d for d in points):
            return False
        return all(eps(fmap(f, d)) == f(eps(d)) for f in functions for d in points)

    found = [eps for eps in candidates.elements() if is_counit(eps)]
    sizes = {"candidates": candidates.size(), "values": len(points)}
    if found:
        return LawReport(law, "partiality", Verdict.STRUCTURE_FOUND, sizes, required=False)
    return LawReport(law, "partiality", Verdict.NO_STRUCTURE, sizes, required=False,
                     note="ε(absent) would have to be absent")


def check_shape_relaxation(inst: IndexedComonad, domain: sv.Domain = sv.BOOL_DOMAIN) -> LawReport:
    """Some index changes the shape: |D F A| ≠ |A|."""
    law = "shape-relaxation"
    for index in inst.algebra.carrier:
        size = inst.carrier_of(index, domain).size()
        if size != domain.size():
            return LawReport(law, inst.name, Verdict.PASS,
                             {"carrier": size, "values": domain.size()},
                             note=f"|D {format_index(index)} {domain.label()}| = {size}")
    return LawReport(law, inst.name, Verdict.FAIL, {"values": domain.size()},
                     counterexample={"inputs": [], "lhs": "every index preserves shape", "rhs": "-"})


def check_mzip_join_derivation() -> LawReport:
    survivors = derive_mzip_join()
    conjunction = {(a, b): a and b for a, b in itertools.product((False, True), repeat=2)}
    sizes = {"candidates": 16, "survivors": len(survivors)}
    if survivors == [conjunction]:
        return LawReport("mzip-join-unique", "partiality", Verdict.PASS, sizes, note="∨ = ∧")
    return failure("mzip-join-unique", "partiality", (), len(survivors), 1, sizes)


# ---------- direct-style oracle ----------

def global_state_oracle(sig: lc.Signature, term: lc.Term, store: sv.Env,
                        params: Optional[sv.Env] = None) -> Tuple[Any, sv.Env, tuple]:
    """Interpret `term` against one mutable store and an append-only trace."""
    state: Dict[str, Any] = store.as_dict()
    trace: List[Tuple[str, Any]] = []
    params = params or sv.EMPTY_ENV

    def run(term, env):
        if isinstance(term, lc.Var):
            return env[term.name]
        if isinstance(term, lc.Const):
            return term.value
        if isinstance(term, lc.Lam):
            return lambda v: run(term.body, {**env, term.param: v})
        if isinstance(term, lc.App):
            fn = run(term.fn, env)
            return fn(run(term.arg, env))
        if isinstance(term, lc.Let):
            bound = run(term.bound, env)
            return run(term.body, {**env, term.name: bound})
        if isinstance(term, lc.Pair):
            first = run(term.first, env)
            return sv.Pair(first, run(term.second, env))
        if isinstance(term, lc.Fst):
            return run(term.expr, env).fst
        if isinstance(term, lc.Snd):
            return run(term.expr, env).snd
        if isinstance(term, lc.If):
            return run(term.then if run(term.cond, env).value else term.orelse, env)
        if isinstance(term, lc.Ask):
            return params[term.param]
        if isinstance(term, lc.Read):
            return state[term.region]
        if isinstance(term, lc.Write):
            state[term.region] = run(term.expr, env)
            return sv.UNIT
        if isinstance(term, lc.Out):
            trace.append((term.tag, run(term.expr, env)))
            return sv.UNIT
        raise TypeError(f"not a term: {term!r}")

    value = run(term, {})
    return value, sv.Env.of(state), tuple(trace)


# ---------- suites ----------

def law_signature(config: dict) -> lc.Signature:
    declared = config["laws"]["signature"]
    return lc.Signature.of(declared.get("params"), declared.get("regions"), declared.get("tags"))


def _fiber_index(inst: IndexedMonad):
    alg = inst.algebra
    if isinstance(inst, MemoryMonad) and inst.sig.regions:
        return alg.lift(write_token(inst.sig.regions[0][0]))
    if isinstance(inst, TraceMonad) and alg.generators:
        return (alg.generators[0],)
    if alg.generators:
        return alg.lift(alg.generators[0])
    return alg.unit


def _monad_suite(inst: IndexedMonad, settings: dict) -> List[Callable[[], List[LawReport]]]:
    tasks = [lambda: check_algebra_laws(inst.algebra, settings["enumeration_budget"]),
             lambda: check_indexed_monad_laws(inst, settings["budget"], settings["seed"],
                                              settings["samples"])]
    index = _fiber_index(inst)
    tasks.append(lambda: [check_fiber_not_monad(inst, index, settings["budget"],
                                                settings["fiber_domain_limit"])])
    return tasks


def _comonad_suite(inst: IndexedComonad, settings: dict) -> List[Callable[[], List[LawReport]]]:
    return [lambda: check_indexed_comonad_laws(inst, settings["budget"], settings["seed"],
                                               settings["samples"]),
            lambda: [check_partiality_has_no_counit(), check_shape_relaxation(inst),
                     check_mzip_join_derivation()]]


def _mutant_report(name: str, reports: Sequence[LawReport]) -> LawReport:
    caught = [report for report in reports if report.required and report.verdict is Verdict.FAIL]
    if caught:
        first = caught[0]
        return LawReport("mutant-rejected", name, Verdict.PASS, first.domain_sizes,
                         counterexample=first.counterexample, witness=first.witness,
                         note=f"caught by {first.law}")
    return failure("mutant-rejected", name, (), "all laws pass", "some law fails")


def _settings(config: dict, budget: Optional[int], seed: Optional[int]) -> dict:
    laws = config["laws"]
    return {
        "budget": budget if budget is not None else laws["budget"],
        "seed": seed if seed is not None else laws["seed"],
        "samples": laws["samples"],
        "fiber_domain_limit": laws["fiber_domain_limit"],
        "enumeration_budget": config["algebra"]["enumeration_budget"],
    }


def run_law_suite(instances: Sequence[str] = LAW_INSTANCES, sig: Optional[lc.Signature] = None,
                  config: Optional[dict] = None, budget: Optional[int] = None,
                  seed: Optional[int] = None, mutants: bool = False) -> List[LawReport]:
    """Every check for the named instances, fanned out over a thread pool.

    Reports come back in a fixed order regardless of scheduling.
    """
    config = config or DEFAULT_CONFIG
    sig = sig or law_signature(config)
    settings = _settings(config, budget, seed)
    max_len = config["trace"]["max_len"]
    tasks: List[Callable[[], List[LawReport]]] = []

    for name in instances:
        if name == "partiality":
            tasks += _comonad_suite(make_partiality_instance(), settings)
            if mutants:
                for mutant in COMONAD_MUTANTS:
                    inst = mutant()
                    tasks.append(lambda inst=inst: [_mutant_report(inst.name, check_indexed_comonad_laws(
                        inst, settings["budget"], settings["seed"], settings["samples"]))])
            continue
        tasks += _monad_suite(build_instance(name, sig, max_len), settings)
        if mutants and name in MONAD_MUTANTS:
            inst = MONAD_MUTANTS[name](sig)
            tasks.append(lambda inst=inst: [_mutant_report(inst.name, check_indexed_monad_laws(
                inst, settings["budget"], settings["seed"], settings["samples"]))])

    workers = max(1, int(config["laws"].get("workers", 1)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda task: task(), tasks))
    return [report for batch in results for report in batch]


def suite_passed(reports: Sequence[LawReport]) -> bool:
    return all(report.ok for report in reports if report.required)
