"""Randomized metatheory harness.

Generates well-typed judgments derivation-first (every case carries the
derivation the checker emitted for it) and runs the property suites:

- ``subject-reduction``: parallel reducts of well-typed terms keep their
  type.
- ``diamond``: every one-step parallel reduct of an arbitrary term
  reduces to its complete development (the triangle property, checked
  exhaustively on small terms).
- ``progress``: closed well-typed terms never get stuck under
  call-by-name evaluation.
- ``canonicity``: closed values match the head form their type demands,
  with concrete levels strictly below their bounds.
- ``consistency``: nothing closed checks against the empty type.
- ``coverage``: every typing rule appears in at least 1% of generated
  derivations.

Generation is deterministic: case ``i`` of seed ``s`` draws from
``random.Random(f"{s}/{i}")``, and each report carries a digest of the
generated stream so two runs with one seed are byte-comparable.
"""

from __future__ import annotations

import hashlib
import random
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator

from . import subst
from .checker import (
    Derivation,
    FuelError,
    TypingError,
    Verdict,
    check,
    infer_with_derivation,
)
from .levels import LevelDomain, LevelValue, NAT_OMEGA, OmegaPlus, domain_named
from .reduction import (
    DEFAULT_FUEL,
    EvalOutcome,
    ParExplosion,
    cbn_eval,
    complete_development,
    par_reducts,
    par_step_check,
    pars,
)
from .terms import (
    Absurd,
    App,
    Context,
    Lam,
    LevelLt,
    Lvl,
    Mty,
    Pi,
    Term,
    Univ,
    Var,
    term_size,
)

__all__ = [
    "GenConfig",
    "GenError",
    "GenCase",
    "gen_case",
    "gen_well_typed",
    "gen_raw",
    "PropertyReport",
    "run_subject_reduction",
    "run_diamond",
    "run_progress",
    "run_canonicity",
    "run_consistency",
    "run_coverage",
    "SUITES",
    "run_suite",
    "shrink_term",
    "broken_substitution",
    "RULES",
]

RULES = (
    "Nil", "Cons", "Var", "Pi", "Lam", "App", "Mty",
    "Abs", "Conv", "Univ", "LevelLt", "Lvl", "Trans", "Cumul",
)


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    cases: int = 200
    max_size: int = 14
    raw_size: int = 12
    domain_name: str = "nat-omega"
    fuel: int = DEFAULT_FUEL


class GenError(Exception):
    """The generator produced a candidate the checker would not accept;
    that is a generator bug and should never be masked."""


@dataclass(frozen=True)
class GenCase:
    index: int
    ctx: Context
    term: Term
    ty: Term
    derivation: Derivation


def _rng_for(cfg: GenConfig, index: int) -> random.Random:
    return random.Random(f"{cfg.seed}/{index}")


def _weighted(rng: random.Random, options: list[tuple[str, int]]) -> str:
    total = sum(w for _, w in options)
    roll = rng.randrange(total)
    for tag, w in options:
        roll -= w
        if roll < 0:
            return tag
    return options[-1][0]


def _above(rng: random.Random, domain: LevelDomain, value: LevelValue) -> LevelValue:
    if domain is NAT_OMEGA and not isinstance(value, OmegaPlus) and rng.random() < 0.3:
        return OmegaPlus(rng.randrange(3))
    out = domain.next_above(value)
    for _ in range(rng.randrange(3)):
        out = domain.next_above(out)
    return out


# ---------------------------------------------------------------------------
# Context and term generation


def gen_context(rng: random.Random, domain: LevelDomain) -> Context:
    depth = rng.randint(0, 4)
    entries: list[Term] = []
    for i in range(depth):
        lt_ixs = [j for j, e in enumerate(entries) if isinstance(e, LevelLt)]
        ty_ixs = [j for j, e in enumerate(entries) if isinstance(e, Univ)]
        options = [("bot", 3), ("ulit", 3), ("ltlit", 3), ("arrow", 1)]
        if lt_ixs:
            options += [("ltvar", 3), ("uvar", 2)]
        if ty_ixs:
            options += [("tyvar", 2)]
        tag = _weighted(rng, options)
        if tag == "bot":
            entries.append(Mty())
        elif tag == "ulit":
            entries.append(Univ(Lvl(domain.sample(rng, 3))))
        elif tag == "ltlit":
            entries.append(LevelLt(Lvl(domain.sample(rng))))
        elif tag == "arrow":
            a = Univ(Lvl(domain.sample(rng, 2)))
            b = Univ(Lvl(domain.sample(rng, 2)))
            entries.append(Pi(a, subst.shift(b, 1, 0)))
        elif tag == "ltvar":
            j = rng.choice(lt_ixs)
            entries.append(LevelLt(Var(i - 1 - j)))
        elif tag == "uvar":
            j = rng.choice(lt_ixs)
            entries.append(Univ(Var(i - 1 - j)))
        else:
            j = rng.choice(ty_ixs)
            entries.append(Var(i - 1 - j))
    return tuple(entries)


def _vars_of(ctx: Context, pred: Callable[[Term], bool]) -> list[int]:
    return [ix for ix in range(len(ctx)) if pred(subst.ctx_lookup(ctx, ix))]


def gen_type(rng: random.Random, ctx: Context, domain: LevelDomain, budget: int) -> Term:
    lt_ixs = _vars_of(ctx, lambda t: isinstance(t, LevelLt))
    ty_ixs = _vars_of(ctx, lambda t: isinstance(t, Univ))
    bot_ixs = _vars_of(ctx, lambda t: t == Mty())
    options = [("bot", 2), ("ulit", 3), ("ltlit", 3)]
    if budget > 2:
        options.append(("pi", 3))
    if lt_ixs:
        options += [("uvar", 2), ("ltvar", 2)]
    if ty_ixs:
        options.append(("tyvar", 2))
    if bot_ixs:
        options.append(("ustuck", 2))
    tag = _weighted(rng, options)
    if tag == "bot":
        return Mty()
    if tag == "ulit":
        return Univ(Lvl(domain.sample(rng, 3)))
    if tag == "ltlit":
        return LevelLt(Lvl(domain.sample(rng)))
    if tag == "uvar":
        return Univ(Var(rng.choice(lt_ixs)))
    if tag == "ltvar":
        return LevelLt(Var(rng.choice(lt_ixs)))
    if tag == "tyvar":
        return Var(rng.choice(ty_ixs))
    if tag == "ustuck":
        return Univ(Absurd(LevelLt(Lvl(domain.sample(rng))), Var(rng.choice(bot_ixs))))
    dom = gen_type(rng, ctx, domain, budget // 2)
    cod = gen_type(rng, subst.ctx_extend(ctx, dom), domain, budget // 2)
    return Pi(dom, cod)


def _inhabit(rng: random.Random, ctx: Context, want: Term, domain: LevelDomain) -> Term | None:
    """Cheap inhabitant of ``want`` in ``ctx``, or None."""
    for ix in range(len(ctx)):
        if subst.ctx_lookup(ctx, ix) == want:
            return Var(ix)
    match want:
        case Univ(_):
            return Mty()
        case LevelLt(Lvl(bound)):
            below = domain.sample_below(rng, bound)
            return Lvl(below) if below is not None else None
        case Mty():
            bots = _vars_of(ctx, lambda t: t == Mty())
            return Var(rng.choice(bots)) if bots else None
    return None


def gen_term(rng: random.Random, ctx: Context, domain: LevelDomain, budget: int) -> Term:
    bot_ixs = _vars_of(ctx, lambda t: t == Mty())
    pi_ixs = _vars_of(ctx, lambda t: isinstance(t, Pi))
    options = [("lvl", 4), ("type", 3)]
    if ctx:
        options.append(("var", 4))
    if budget > 2:
        options.append(("lam", 3))
    if budget > 3:
        options.append(("redex", 3))
    if bot_ixs:
        options.append(("absurd", 3))
    if pi_ixs:
        options.append(("appvar", 2))
    tag = _weighted(rng, options)
    if tag == "lvl":
        a = domain.sample(rng)
        return Lvl(a)
    if tag == "var":
        return Var(rng.randrange(len(ctx)))
    if tag == "type":
        return gen_type(rng, ctx, domain, budget)
    if tag == "lam":
        dom = gen_type(rng, ctx, domain, max(1, budget // 3))
        body = gen_term(rng, subst.ctx_extend(ctx, dom), domain, budget // 2)
        return Lam(dom, body)
    if tag == "redex":
        arg = gen_term(rng, ctx, domain, max(1, budget // 3))
        arg_ty, _ = infer_with_derivation(ctx, arg, domain)
        if rng.random() < 0.4:
            body: Term = Var(0)
        else:
            body = subst.shift(gen_term(rng, ctx, domain, max(1, budget // 3)), 1, 0)
        return App(Lam(arg_ty, body), arg)
    if tag == "absurd":
        ann = gen_type(rng, ctx, domain, max(1, budget - 1))
        return Absurd(ann, Var(rng.choice(bot_ixs)))
    pix = rng.choice(pi_ixs)
    pi_ty = subst.ctx_lookup(ctx, pix)
    arg = _inhabit(rng, ctx, pi_ty.dom, domain)
    if arg is None:
        return gen_term(rng, ctx, domain, max(1, budget - 1))
    return App(Var(pix), arg)


def _relax_type(rng: random.Random, ctx: Context, ty: Term, domain: LevelDomain, fuel: int) -> Term:
    """Loosen an inferred type so checking has to subsume or convert."""
    roll = rng.random()
    if roll < 0.45:
        return ty
    n_ty, done = pars(ty, fuel)
    if not done:
        return ty
    out = n_ty
    match n_ty:
        case Univ(Lvl(v)):
            out = Univ(Lvl(_above(rng, domain, v)))
        case LevelLt(Lvl(v)):
            out = LevelLt(Lvl(_above(rng, domain, v)))
    if roll > 0.8:
        try:
            u_ty, _ = infer_with_derivation(ctx, out, domain, fuel)
        except TypingError:
            return out
        n_u, done_u = pars(u_ty, fuel)
        if done_u and isinstance(n_u, Univ) and isinstance(n_u.level, Lvl):
            wrapper = Lam(Univ(Lvl(domain.next_above(n_u.level.value))), Var(0))
            return App(wrapper, out)
    return out


def gen_case(
    cfg: GenConfig,
    index: int,
    domain: LevelDomain | None = None,
    closed: bool = False,
) -> GenCase:
    domain = domain or domain_named(cfg.domain_name)
    rng = _rng_for(cfg, index)
    ctx = () if closed else gen_context(rng, domain)
    term = gen_term(rng, ctx, domain, cfg.max_size)
    try:
        inferred, _ = infer_with_derivation(ctx, term, domain, cfg.fuel)
    except TypingError as e:
        raise GenError(f"case {index}: generated term failed inference: {e}") from e
    ty = _relax_type(rng, ctx, inferred, domain, cfg.fuel)
    res = check(ctx, term, ty, domain, cfg.fuel)
    if res.verdict is not Verdict.ACCEPTED or res.derivation is None:
        raise GenError(
            f"case {index}: generated judgment rejected: {res.message}"
        )
    return GenCase(index, ctx, term, ty, res.derivation)


def gen_well_typed(cfg: GenConfig, closed: bool = False) -> Iterator[GenCase]:
    domain = domain_named(cfg.domain_name)
    for i in range(cfg.cases):
        yield gen_case(cfg, i, domain, closed)


def gen_raw(rng: random.Random, size: int, free: int = 3) -> Term:
    """Arbitrary syntactically valid term; no typing discipline at all."""
    if size <= 1:
        tag = _weighted(rng, [("var", 3), ("lvl", 2), ("bot", 2)])
        if tag == "var":
            return Var(rng.randrange(max(1, free + 1)))
        if tag == "lvl":
            return Lvl(NAT_OMEGA.sample(rng, 3))
        return Mty()
    tag = _weighted(
        rng,
        [("app", 5), ("lam", 4), ("pi", 2), ("univ", 2), ("lt", 2), ("absurd", 1)],
    )
    half = size // 2
    if tag == "app":
        if rng.random() < 0.55:
            ann = gen_raw(rng, max(1, half // 2), free)
            body = gen_raw(rng, half, free + 1)
            return App(Lam(ann, body), gen_raw(rng, half, free))
        return App(gen_raw(rng, half, free), gen_raw(rng, half, free))
    if tag == "lam":
        return Lam(gen_raw(rng, max(1, half // 2), free), gen_raw(rng, size - 1, free + 1))
    if tag == "pi":
        return Pi(gen_raw(rng, half, free), gen_raw(rng, half, free + 1))
    if tag == "univ":
        return Univ(gen_raw(rng, size - 1, free))
    if tag == "lt":
        return LevelLt(gen_raw(rng, size - 1, free))
    return Absurd(gen_raw(rng, half, free), gen_raw(rng, half, free))


# ---------------------------------------------------------------------------
# Shrinking

_LEAF_SWAPS = (Mty(), Lvl(NAT_OMEGA.zero()))


def _children(t: Term) -> tuple[Term, ...]:
    match t:
        case Var(_) | Lvl(_) | Mty():
            return ()
        case Pi(a, b) | Lam(a, b) | App(a, b) | Absurd(a, b):
            return (a, b)
        case Univ(a) | LevelLt(a):
            return (a,)
    raise TypeError(f"Unexpected term: {t!r}")


def _rebuild(t: Term, kids: tuple[Term, ...]) -> Term:
    match t:
        case Pi(_, _):
            return Pi(*kids)
        case Lam(_, _):
            return Lam(*kids)
        case App(_, _):
            return App(*kids)
        case Absurd(_, _):
            return Absurd(*kids)
        case Univ(_):
            return Univ(*kids)
        case LevelLt(_):
            return LevelLt(*kids)
    raise TypeError(f"Unexpected term: {t!r}")


def _shrink_candidates(t: Term) -> Iterator[Term]:
    for leaf in _LEAF_SWAPS:
        if t != leaf:
            yield leaf
    kids = _children(t)
    for kid in kids:
        yield kid
    for i, kid in enumerate(kids):
        for smaller in _shrink_candidates(kid):
            if term_size(smaller) < term_size(kid):
                yield _rebuild(t, kids[:i] + (smaller,) + kids[i + 1 :])


def shrink_term(t: Term, still_fails: Callable[[Term], bool], budget: int = 400) -> Term:
    spent = 0
    improved = True
    while improved and spent < budget:
        improved = False
        for cand in _shrink_candidates(t):
            spent += 1
            if spent >= budget:
                break
            if term_size(cand) >= term_size(t):
                continue
            try:
                bad = still_fails(cand)
            except Exception:
                bad = False
            if bad:
                t = cand
                improved = True
                break
    return t


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class PropertyReport:
    suite: str
    cases: int
    failures: tuple[str, ...]
    undecided: int
    digest: str
    elapsed: float
    coverage: tuple[tuple[str, float], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        lines = [
            f"suite={self.suite} cases={self.cases} "
            f"failures={len(self.failures)} undecided={self.undecided} "
            f"digest={self.digest} elapsed={self.elapsed:.2f}s"
        ]
        for rule, frac in self.coverage:
            lines.append(f"  rule {rule}: {100.0 * frac:.2f}% of cases")
        for msg in self.failures[:10]:
            lines.append(f"  FAIL {msg}")
        if len(self.failures) > 10:
            lines.append(f"  ... and {len(self.failures) - 10} more")
        return "\n".join(lines)


class _Tally:
    def __init__(self, suite: str):
        self.suite = suite
        self.failures: list[str] = []
        self.undecided = 0
        self._hash = hashlib.sha256()
        self._start = time.monotonic()

    def feed(self, payload: object) -> None:
        self._hash.update(repr(payload).encode())

    def fail(self, message: str) -> None:
        self.failures.append(message)

    def report(self, cases: int, coverage: tuple = ()) -> PropertyReport:
        return PropertyReport(
            suite=self.suite,
            cases=cases,
            failures=tuple(self.failures),
            undecided=self.undecided,
            digest=self._hash.hexdigest()[:16],
            elapsed=time.monotonic() - self._start,
            coverage=coverage,
        )


def rules_in(d: Derivation) -> frozenset[str]:
    seen: set[str] = set()
    stack = [d]
    while stack:
        node = stack.pop()
        seen.add(node.rule)
        stack.extend(node.premises)
    return frozenset(seen)


# ---------------------------------------------------------------------------
# Suites


def run_subject_reduction(cfg: GenConfig) -> PropertyReport:
    tally = _Tally("subject-reduction")
    domain = domain_named(cfg.domain_name)
    for i in range(cfg.cases):
        try:
            case = gen_case(cfg, i, domain)
            tally.feed((case.ctx, case.term, case.ty))
            try:
                reducts = par_reducts(case.term, cap=4000)
            except ParExplosion:
                reducts = frozenset({complete_development(case.term)})
            for u in reducts:
                if u == case.term:
                    continue
                res = check(case.ctx, u, case.ty, domain, cfg.fuel)
                if res.verdict is Verdict.REJECTED:
                    shrunk = _shrink_sr(case.ctx, case.term, case.ty, domain, cfg.fuel)
                    tally.fail(
                        f"case {i}: type lost after reduction; "
                        f"term {shrunk!r} : {case.ty!r}"
                    )
                    break
                if res.verdict is Verdict.UNDECIDED:
                    tally.undecided += 1
        except FuelError:
            tally.undecided += 1
        except Exception as e:
            tally.fail(f"case {i}: internal error: {e!r}")
    return tally.report(cfg.cases)


def _shrink_sr(ctx: Context, term: Term, ty: Term, domain, fuel: int) -> Term:
    def fails(t: Term) -> bool:
        if check(ctx, t, ty, domain, fuel).verdict is not Verdict.ACCEPTED:
            return False
        try:
            reducts = par_reducts(t, cap=2000)
        except ParExplosion:
            reducts = frozenset({complete_development(t)})
        return any(
            check(ctx, u, ty, domain, fuel).verdict is Verdict.REJECTED
            for u in reducts
            if u != t
        )

    return shrink_term(term, fails)


def run_diamond(cfg: GenConfig) -> PropertyReport:
    tally = _Tally("diamond")
    for i in range(cfg.cases):
        rng = _rng_for(cfg, i)
        t = gen_raw(rng, cfg.raw_size)
        tally.feed(t)
        try:
            developed = complete_development(t)
            reducts = par_reducts(t, cap=20000)
            for u in reducts:
                if not par_step_check(u, developed, cap=20000):
                    def fails(s: Term) -> bool:
                        d = complete_development(s)
                        return any(
                            not par_step_check(v, d, cap=5000)
                            for v in par_reducts(s, cap=5000)
                        )

                    shrunk = shrink_term(t, fails)
                    tally.fail(
                        f"case {i}: reduct does not rejoin the complete "
                        f"development of {shrunk!r}"
                    )
                    break
        except ParExplosion:
            tally.undecided += 1
        except Exception as e:
            tally.fail(f"case {i}: internal error: {e!r}")
    return tally.report(cfg.cases)


def run_progress(cfg: GenConfig) -> PropertyReport:
    tally = _Tally("progress")
    domain = domain_named(cfg.domain_name)
    for i in range(cfg.cases):
        try:
            case = gen_case(cfg, i, domain, closed=True)
            tally.feed((case.term, case.ty))
            result, outcome = cbn_eval(case.term, cfg.fuel)
            if outcome is EvalOutcome.STUCK:
                tally.fail(
                    f"case {i}: closed well-typed term got stuck at {result!r} "
                    f"(from {case.term!r})"
                )
            elif outcome is EvalOutcome.OUT_OF_FUEL:
                tally.undecided += 1
        except FuelError:
            tally.undecided += 1
        except Exception as e:
            tally.fail(f"case {i}: internal error: {e!r}")
    return tally.report(cfg.cases)


def run_canonicity(cfg: GenConfig) -> PropertyReport:
    tally = _Tally("canonicity")
    domain = domain_named(cfg.domain_name)
    for i in range(cfg.cases):
        try:
            case = gen_case(cfg, i, domain, closed=True)
            tally.feed((case.term, case.ty))
            n_ty, ty_done = pars(case.ty, cfg.fuel)
            value, outcome = cbn_eval(case.term, cfg.fuel)
            if not ty_done or outcome is EvalOutcome.OUT_OF_FUEL:
                tally.undecided += 1
                continue
            if outcome is EvalOutcome.STUCK:
                tally.fail(f"case {i}: closed term stuck at {value!r}")
                continue
            message = _canonical_mismatch(value, n_ty, domain, cfg.fuel)
            if message:
                tally.fail(f"case {i}: {message} (term {case.term!r} : {n_ty!r})")
        except FuelError:
            tally.undecided += 1
        except Exception as e:
            tally.fail(f"case {i}: internal error: {e!r}")
    return tally.report(cfg.cases)


def _canonical_mismatch(value: Term, n_ty: Term, domain, fuel: int) -> str | None:
    match n_ty:
        case Univ(_):
            if not isinstance(value, (Pi, Mty, Univ, LevelLt)):
                return f"value of a universe is not a type former: {value!r}"
            return None
        case LevelLt(bound):
            if not isinstance(value, Lvl):
                return f"value of a bound type is not a level literal: {value!r}"
            n_bound, done = pars(bound, fuel)
            if not done or not isinstance(n_bound, Lvl):
                return f"closed level bound did not normalize to a literal: {bound!r}"
            if not domain.lt(value.value, n_bound.value):
                return (
                    f"level {value!r} is not strictly below its bound {n_bound!r}"
                )
            return None
        case Pi(_, _):
            if not isinstance(value, Lam):
                return f"value of a function type is not an abstraction: {value!r}"
            return None
        case Mty():
            return "closed inhabitant of the empty type"
    return f"closed type did not normalize to a recognized former: {n_ty!r}"


def run_consistency(cfg: GenConfig) -> PropertyReport:
    tally = _Tally("consistency")
    domain = domain_named(cfg.domain_name)
    for i in range(cfg.cases):
        try:
            if i % 2 == 0:
                candidate = gen_raw(_rng_for(cfg, i), cfg.raw_size, free=0)
            else:
                candidate = gen_case(cfg, i, domain, closed=True).term
            tally.feed(candidate)
            res = check((), candidate, Mty(), domain, cfg.fuel)
            if res.verdict is Verdict.ACCEPTED:
                tally.fail(
                    f"case {i}: closed proof of the empty type accepted: "
                    f"{candidate!r}"
                )
            elif res.verdict is Verdict.UNDECIDED:
                tally.undecided += 1
        except FuelError:
            tally.undecided += 1
        except Exception as e:
            tally.fail(f"case {i}: internal error: {e!r}")
    return tally.report(cfg.cases)


def run_coverage(cfg: GenConfig) -> PropertyReport:
    tally = _Tally("coverage")
    domain = domain_named(cfg.domain_name)
    counts: Counter[str] = Counter()
    produced = 0
    for i in range(cfg.cases):
        try:
            case = gen_case(cfg, i, domain)
            tally.feed((case.ctx, case.term, case.ty))
            produced += 1
            for rule in rules_in(case.derivation):
                counts[rule] += 1
        except Exception as e:
            tally.fail(f"case {i}: internal error: {e!r}")
    coverage = tuple(
        (rule, counts[rule] / produced if produced else 0.0) for rule in RULES
    )
    for rule, frac in coverage:
        if frac < 0.01:
            tally.fail(
                f"rule {rule} appears in {100.0 * frac:.2f}% of cases (< 1%)"
            )
    return tally.report(cfg.cases, coverage)


SUITES: dict[str, Callable[[GenConfig], PropertyReport]] = {
    "subject-reduction": run_subject_reduction,
    "diamond": run_diamond,
    "progress": run_progress,
    "canonicity": run_canonicity,
    "consistency": run_consistency,
    "coverage": run_coverage,
}


def run_suite(name: str, cfg: GenConfig) -> PropertyReport:
    if name not in SUITES:
        known = ", ".join(sorted(SUITES))
        raise ValueError(f"unknown suite {name!r} (known: {known})")
    return SUITES[name](cfg)


# ---------------------------------------------------------------------------
# Mutation canary


@contextmanager
def broken_substitution():
    """Swap in a deliberately wrong weakening (off-by-one cutoff).

    A harness that still reports zero failures under this breakage is
    not exercising substitution; the test suite runs the reduced suites
    inside this context and demands failures.
    """
    original = subst.shift

    def skewed(term: Term, by: int, cutoff: int = 0) -> Term:
        return original(term, by, cutoff + 1)

    subst.shift = skewed
    try:
        yield
    finally:
        subst.shift = original
