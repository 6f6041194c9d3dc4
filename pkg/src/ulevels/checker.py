"""Typing: derivation trees, a derivation checker, and an algorithmic
infer/check pair that emits derivations.

The derivation checker is the ground truth: it validates each node
against exactly one rule. The algorithmic checker is sound against it
(every acceptance carries a derivation that validates) but makes no
completeness claim; transitivity and cumulativity are not syntax
directed, so it decides them with a bounded strategy: normalize,
compare concrete levels, walk context-declared bounds, then climb
inferred bounds a capped number of times.

Three outcomes everywhere: accepted, rejected, and undecided (fuel ran
out inside conversion). Rejections carry diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .levels import Finite, LevelDomain, LevelValue, NAT_OMEGA, OmegaPlus, domain_named
from .reduction import (
    Convertibility,
    DEFAULT_FUEL,
    convertible,
    pars,
    whnf,
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
    alpha_equal,
    iter_subterms,
)
from . import subst

__all__ = [
    "Derivation",
    "DerivationReport",
    "check_derivation",
    "derivation_to_doc",
    "derivation_from_doc",
    "term_to_doc",
    "term_from_doc",
    "Verdict",
    "CheckResult",
    "TypingError",
    "FuelError",
    "TypeChecker",
    "LevelOrder",
    "infer",
    "infer_with_derivation",
    "check",
    "check_context",
    "level_lt_check",
    "elaborate_lam_prime",
    "search_derivation",
    "brief",
]

CLIMB_CAP = 64


# ---------------------------------------------------------------------------
# Derivation trees


@dataclass(frozen=True)
class Derivation:
    """One rule application. Context judgments (Nil/Cons) leave term and
    ty as None; typing judgments fill both."""

    rule: str
    ctx: Context
    term: Term | None
    ty: Term | None
    premises: tuple["Derivation", ...] = ()
    side: tuple[tuple[str, object], ...] = ()

    def side_value(self, key: str):
        for k, v in self.side:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class DerivationReport:
    ok: bool
    errors: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def brief(term: Term | None, depth: int = 0) -> str:
    """Compact ASCII rendering for diagnostics."""
    match term:
        case None:
            return "-"
        case Var(ix):
            return f"#{ix}"
        case Lvl(v):
            if isinstance(v, Finite):
                return str(v.n)
            return "omega" if v.n == 0 else f"omega+{v.n}"
        case Mty():
            return "Bot"
        case Pi(a, b):
            return f"(Pi {brief(a)}. {brief(b)})"
        case Lam(a, b):
            return f"(fun {brief(a)}. {brief(b)})"
        case App(a, b):
            return f"({brief(a)} {brief(b)})"
        case Absurd(a, b):
            return f"(absurd [{brief(a)}] {brief(b)})"
        case Univ(a):
            return f"(U {brief(a)})"
        case LevelLt(a):
            return f"(Level< {brief(a)})"
    raise TypeError(f"Unexpected term in brief: {term!r}")


def _is_ctx_judgment(d: Derivation) -> bool:
    return d.rule in ("Nil", "Cons")


def check_derivation(
    d: Derivation,
    domain: LevelDomain = NAT_OMEGA,
    fuel: int = DEFAULT_FUEL,
) -> DerivationReport:
    """Validate every node of ``d`` against its rule."""
    errors: list[str] = []

    def fail(path: str, msg: str) -> None:
        errors.append(f"{path}: {msg}" if path else msg)

    def expect_typing(p: Derivation, path: str) -> bool:
        if _is_ctx_judgment(p):
            fail(path, f"{p.rule}: expected a typing premise")
            return False
        return True

    def go(node: Derivation, path: str) -> None:
        for i, p in enumerate(node.premises):
            go(p, f"{path}.premises[{i}]" if path else f"premises[{i}]")
        n = len(node.premises)
        r = node.rule
        if r == "Nil":
            if node.ctx != () or n != 0:
                fail(path, "Nil: context must be empty with no premises")
            if node.term is not None or node.ty is not None:
                fail(path, "Nil: not a typing judgment")
            return
        if r == "Cons":
            if n != 2:
                fail(path, "Cons: needs a context premise and a typing premise")
                return
            p_ctx, p_ty = node.premises
            if not node.ctx or node.ctx[:-1] != p_ctx.ctx:
                fail(path, "Cons: context premise must cover the prefix")
            if not _is_ctx_judgment(p_ctx):
                fail(path, "Cons: first premise must be a context judgment")
            if not expect_typing(p_ty, path):
                return
            if p_ty.ctx != node.ctx[:-1] or (
                node.ctx and p_ty.term != node.ctx[-1]
            ):
                fail(path, "Cons: entry must be typed in the prefix")
            if not isinstance(p_ty.ty, Univ):
                fail(path, "Cons: entry must inhabit a universe")
            if node.term is not None or node.ty is not None:
                fail(path, "Cons: not a typing judgment")
            return
        if node.term is None or node.ty is None:
            fail(path, f"{r}: missing subject or type")
            return
        if r == "Var":
            if n != 1 or not _is_ctx_judgment(node.premises[0]):
                fail(path, "Var: needs one context premise")
                return
            if node.premises[0].ctx != node.ctx:
                fail(path, "Var: context premise mismatch")
            if not isinstance(node.term, Var):
                fail(path, "Var: subject must be a variable")
                return
            try:
                looked = subst.ctx_lookup(node.ctx, node.term.ix)
            except IndexError:
                fail(path, "Var: index out of scope")
                return
            if not alpha_equal(looked, node.ty):
                fail(path, "Var: type differs from the context entry")
            return
        if r == "Lvl":
            if n != 1 or not _is_ctx_judgment(node.premises[0]):
                fail(path, "Lvl: needs one context premise")
                return
            if node.premises[0].ctx != node.ctx:
                fail(path, "Lvl: context premise mismatch")
            match (node.term, node.ty):
                case (Lvl(i), LevelLt(Lvl(j))):
                    if not (domain.contains(i) and domain.contains(j)):
                        fail(path, "Lvl: level outside the domain")
                    elif not domain.lt(i, j):
                        fail(path, "Lvl: i < j fails")
                case _:
                    fail(path, "Lvl: shape must be literal : Level< literal")
            return
        if r == "Pi":
            if n != 2 or not all(expect_typing(p, path) for p in node.premises):
                fail(path, "Pi: needs two typing premises")
                return
            p_dom, p_cod = node.premises
            match node.term:
                case Pi(dom, cod):
                    pass
                case _:
                    fail(path, "Pi: subject must be a function type")
                    return
            if not (
                isinstance(node.ty, Univ)
                and isinstance(p_dom.ty, Univ)
                and isinstance(p_cod.ty, Univ)
            ):
                fail(path, "Pi: judgment types must be universes")
                return
            k = node.ty.level
            ok = (
                p_dom.ctx == node.ctx
                and alpha_equal(p_dom.term, dom)
                and alpha_equal(p_dom.ty.level, k)
                and p_cod.ctx == subst.ctx_extend(node.ctx, dom)
                and alpha_equal(p_cod.term, cod)
                and alpha_equal(p_cod.ty.level, subst.shift(k, 1, 0))
            )
            if not ok:
                fail(path, "Pi: domain and codomain must share the universe")
            return
        if r == "Lam":
            if n != 3 or not all(expect_typing(p, path) for p in node.premises):
                fail(path, "Lam: needs three typing premises")
                return
            p_dom, p_pi, p_body = node.premises
            match (node.term, node.ty):
                case (Lam(ann, body), Pi(dom, cod)):
                    pass
                case _:
                    fail(path, "Lam: shape must be abstraction : function type")
                    return
            if not alpha_equal(ann, dom):
                fail(path, "Lam: annotation differs from the domain")
                return
            if not (isinstance(p_dom.ty, Univ) and isinstance(p_pi.ty, Univ)):
                fail(path, "Lam: universe premises malformed")
                return
            ok = (
                p_dom.ctx == node.ctx
                and alpha_equal(p_dom.term, ann)
                and p_pi.ctx == node.ctx
                and alpha_equal(p_pi.term, node.ty)
                and alpha_equal(p_dom.ty.level, p_pi.ty.level)
                and p_body.ctx == subst.ctx_extend(node.ctx, ann)
                and alpha_equal(p_body.term, body)
                and alpha_equal(p_body.ty, cod)
            )
            if not ok:
                fail(path, "Lam: premises disagree with the conclusion")
            return
        if r == "App":
            if n != 2 or not all(expect_typing(p, path) for p in node.premises):
                fail(path, "App: needs two typing premises")
                return
            p_fn, p_arg = node.premises
            match node.term:
                case App(fn, arg):
                    pass
                case _:
                    fail(path, "App: subject must be an application")
                    return
            if not isinstance(p_fn.ty, Pi):
                fail(path, "App: function premise must have a function type")
                return
            ok = (
                p_fn.ctx == node.ctx
                and alpha_equal(p_fn.term, fn)
                and p_arg.ctx == node.ctx
                and alpha_equal(p_arg.term, arg)
                and alpha_equal(p_arg.ty, p_fn.ty.dom)
                and alpha_equal(node.ty, subst.subst1(p_fn.ty.cod, arg))
            )
            if not ok:
                fail(path, "App: instantiated codomain mismatch")
            return
        if r == "Mty":
            if n != 1 or not expect_typing(node.premises[0], path):
                fail(path, "Mty: needs one typing premise")
                return
            p = node.premises[0]
            ok = (
                isinstance(node.term, Mty)
                and isinstance(node.ty, Univ)
                and p.ctx == node.ctx
                and alpha_equal(p.term, node.ty)
                and isinstance(p.ty, Univ)
            )
            if not ok:
                fail(path, "Mty: premise must type the target universe")
            return
        if r == "Abs":
            if n != 2 or not all(expect_typing(p, path) for p in node.premises):
                fail(path, "Abs: needs two typing premises")
                return
            p_ty, p_prf = node.premises
            match node.term:
                case Absurd(ann, scrut):
                    pass
                case _:
                    fail(path, "Abs: subject must be an absurdity elimination")
                    return
            ok = (
                alpha_equal(node.ty, ann)
                and p_ty.ctx == node.ctx
                and alpha_equal(p_ty.term, ann)
                and isinstance(p_ty.ty, Univ)
                and p_prf.ctx == node.ctx
                and alpha_equal(p_prf.term, scrut)
                and isinstance(p_prf.ty, Mty)
            )
            if not ok:
                fail(path, "Abs: annotation or scrutinee premise mismatch")
            return
        if r == "Conv":
            if n != 2 or not all(expect_typing(p, path) for p in node.premises):
                fail(path, "Conv: needs two typing premises")
                return
            p_subj, p_target = node.premises
            ok_shape = (
                p_subj.ctx == node.ctx
                and alpha_equal(p_subj.term, node.term)
                and p_target.ctx == node.ctx
                and alpha_equal(p_target.term, node.ty)
                and isinstance(p_target.ty, Univ)
            )
            if not ok_shape:
                fail(path, "Conv: premises disagree with the conclusion")
                return
            verdict = convertible(p_subj.ty, node.ty, fuel)
            if verdict is Convertibility.NO:
                fail(path, "Conv: types are not convertible")
            elif verdict is Convertibility.UNDECIDED:
                fail(path, "Conv: conversion undecided within fuel")
            return
        if r == "Univ":
            if n != 1 or not expect_typing(node.premises[0], path):
                fail(path, "Univ: needs one typing premise")
                return
            p = node.premises[0]
            match (node.term, node.ty):
                case (Univ(k), Univ(l)):
                    pass
                case _:
                    fail(path, "Univ: shape must be universe : universe")
                    return
            ok = (
                p.ctx == node.ctx
                and alpha_equal(p.term, k)
                and alpha_equal(p.ty, LevelLt(l))
            )
            if not ok:
                fail(path, "Univ: level premise must bound the index")
            return
        if r == "LevelLt":
            if n != 2 or not all(expect_typing(p, path) for p in node.premises):
                fail(path, "LevelLt: needs two typing premises")
                return
            p_univ, p_bound = node.premises
            match (node.term, node.ty):
                case (LevelLt(k0), Univ(k1)):
                    pass
                case _:
                    fail(path, "LevelLt: shape must be bound type : universe")
                    return
            ok = (
                p_univ.ctx == node.ctx
                and alpha_equal(p_univ.term, Univ(k1))
                and isinstance(p_univ.ty, Univ)
                and p_bound.ctx == node.ctx
                and alpha_equal(p_bound.term, k0)
                and isinstance(p_bound.ty, LevelLt)
            )
            if not ok:
                fail(path, "LevelLt: premises must type the universe and the bound")
            return
        if r == "Trans":
            if n != 2 or not all(expect_typing(p, path) for p in node.premises):
                fail(path, "Trans: needs two typing premises")
                return
            p_lo, p_hi = node.premises
            ok = (
                p_lo.ctx == node.ctx
                and p_hi.ctx == node.ctx
                and alpha_equal(p_lo.term, node.term)
                and isinstance(p_lo.ty, LevelLt)
                and isinstance(node.ty, LevelLt)
                and alpha_equal(p_hi.term, p_lo.ty.bound)
                and isinstance(p_hi.ty, LevelLt)
                and alpha_equal(p_hi.ty.bound, node.ty.bound)
            )
            if not ok:
                fail(path, "Trans: middle bound must match both premises")
            return
        if r == "Cumul":
            if n != 2 or not all(expect_typing(p, path) for p in node.premises):
                fail(path, "Cumul: needs two typing premises")
                return
            p_subj, p_lt = node.premises
            ok = (
                p_subj.ctx == node.ctx
                and p_lt.ctx == node.ctx
                and alpha_equal(p_subj.term, node.term)
                and isinstance(p_subj.ty, Univ)
                and isinstance(node.ty, Univ)
                and alpha_equal(p_lt.term, p_subj.ty.level)
                and isinstance(p_lt.ty, LevelLt)
                and alpha_equal(p_lt.ty.bound, node.ty.level)
            )
            if not ok:
                fail(path, "Cumul: level premise must lift to the target universe")
            return
        fail(path, f"unknown rule: {r}")

    go(d, "")
    return DerivationReport(not errors, tuple(errors))


# ---------------------------------------------------------------------------
# JSON documents


def _level_to_doc(v: LevelValue) -> dict:
    match v:
        case Finite(n):
            return {"tier": "finite", "n": n}
        case OmegaPlus(n):
            return {"tier": "omega", "n": n}
    raise TypeError(f"Unexpected level value: {v!r}")


def _level_from_doc(doc: dict) -> LevelValue:
    if doc["tier"] == "finite":
        return Finite(int(doc["n"]))
    if doc["tier"] == "omega":
        return OmegaPlus(int(doc["n"]))
    raise ValueError(f"unknown level tier: {doc!r}")


def term_to_doc(term: Term) -> dict:
    match term:
        case Var(ix):
            return {"k": "Var", "ix": ix}
        case Lvl(v):
            return {"k": "Lvl", "value": _level_to_doc(v)}
        case Mty():
            return {"k": "Mty"}
        case Pi(a, b):
            return {"k": "Pi", "dom": term_to_doc(a), "cod": term_to_doc(b)}
        case Lam(a, b):
            return {"k": "Lam", "ann": term_to_doc(a), "body": term_to_doc(b)}
        case App(a, b):
            return {"k": "App", "fn": term_to_doc(a), "arg": term_to_doc(b)}
        case Absurd(a, b):
            return {"k": "Absurd", "ann": term_to_doc(a), "scrut": term_to_doc(b)}
        case Univ(a):
            return {"k": "Univ", "level": term_to_doc(a)}
        case LevelLt(a):
            return {"k": "LevelLt", "bound": term_to_doc(a)}
    raise TypeError(f"Unexpected term in term_to_doc: {term!r}")


def term_from_doc(doc: dict) -> Term:
    k = doc["k"]
    if k == "Var":
        return Var(int(doc["ix"]))
    if k == "Lvl":
        return Lvl(_level_from_doc(doc["value"]))
    if k == "Mty":
        return Mty()
    if k == "Pi":
        return Pi(term_from_doc(doc["dom"]), term_from_doc(doc["cod"]))
    if k == "Lam":
        return Lam(term_from_doc(doc["ann"]), term_from_doc(doc["body"]))
    if k == "App":
        return App(term_from_doc(doc["fn"]), term_from_doc(doc["arg"]))
    if k == "Absurd":
        return Absurd(term_from_doc(doc["ann"]), term_from_doc(doc["scrut"]))
    if k == "Univ":
        return Univ(term_from_doc(doc["level"]))
    if k == "LevelLt":
        return LevelLt(term_from_doc(doc["bound"]))
    raise ValueError(f"unknown term tag: {k!r}")


def _node_to_doc(d: Derivation) -> dict:
    doc = {
        "rule": d.rule,
        "ctx": [term_to_doc(t) for t in d.ctx],
        "term": None if d.term is None else term_to_doc(d.term),
        "ty": None if d.ty is None else term_to_doc(d.ty),
        "premises": [_node_to_doc(p) for p in d.premises],
    }
    if d.side:
        doc["side"] = {
            k: _level_to_doc(v) if isinstance(v, (Finite, OmegaPlus)) else v
            for k, v in d.side
        }
    return doc


def derivation_to_doc(d: Derivation, domain: LevelDomain = NAT_OMEGA) -> dict:
    return {"domain": domain.name, "root": _node_to_doc(d)}


def _node_from_doc(doc: dict) -> Derivation:
    side = doc.get("side", {})
    side_items = []
    for k, v in side.items():
        if isinstance(v, dict) and "tier" in v:
            v = _level_from_doc(v)
        side_items.append((k, v))
    return Derivation(
        rule=doc["rule"],
        ctx=tuple(term_from_doc(t) for t in doc["ctx"]),
        term=None if doc["term"] is None else term_from_doc(doc["term"]),
        ty=None if doc["ty"] is None else term_from_doc(doc["ty"]),
        premises=tuple(_node_from_doc(p) for p in doc["premises"]),
        side=tuple(side_items),
    )


def derivation_from_doc(doc: dict) -> tuple[Derivation, LevelDomain]:
    return _node_from_doc(doc["root"]), domain_named(doc["domain"])


# ---------------------------------------------------------------------------
# Algorithmic checking


class Verdict(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class CheckResult:
    verdict: Verdict
    message: str = ""
    derivation: Derivation | None = None

    def __bool__(self) -> bool:
        return self.verdict is Verdict.ACCEPTED


class TypingError(Exception):
    """Rejection with a diagnostic."""


class FuelError(TypingError):
    """Conversion or normalization ran out of fuel: undecided."""


class LevelOrder:
    """Reachability between normalized level terms along the bounds the
    context declares. An entry x : Level< b contributes the edge
    x -> normalize(b); concrete literals step to any larger literal.

    Paths witness chains of the transitivity rule. Absence of a path is
    not proof of underivability (bounds can also come from typing, not
    just context entries), so callers treat a miss as "not shown".
    """

    def __init__(self, ctx: Context, domain: LevelDomain, fuel: int = DEFAULT_FUEL):
        self.domain = domain
        self.edges: dict[Term, Term] = {}
        for ix in range(len(ctx)):
            entry, done = pars(subst.ctx_lookup(ctx, ix), fuel)
            if done and isinstance(entry, LevelLt):
                bound, bdone = pars(entry.bound, fuel)
                if bdone:
                    self.edges[Var(ix)] = bound

    def path(self, src: Term, dst: Term) -> list[Term] | None:
        """Nodes visited from ``src`` to ``dst`` inclusive, or None."""
        seen = {src}
        frontier: list[list[Term]] = [[src]]
        while frontier:
            trail = frontier.pop(0)
            node = trail[-1]
            if alpha_equal(node, dst):
                return trail
            hops: list[Term] = []
            nxt = self.edges.get(node)
            if nxt is not None:
                hops.append(nxt)
            match (node, dst):
                case (Lvl(a), Lvl(b)):
                    if self.domain.lt(a, b):
                        hops.append(dst)
                case _:
                    pass
            for hop in hops:
                if hop not in seen:
                    seen.add(hop)
                    frontier.append(trail + [hop])
        return None


class TypeChecker:
    """Bidirectional checker emitting derivations.

    ``infer`` synthesizes a type; ``check`` pushes an expected type into
    introduction forms and otherwise subsumes the inferred type through
    conversion, cumulativity, and bound transitivity.
    """

    def __init__(self, domain: LevelDomain = NAT_OMEGA, fuel: int = DEFAULT_FUEL):
        self.domain = domain
        self.fuel = fuel
        self._ctx_cache: dict[Context, Derivation] = {}

    # -- small utilities

    def _norm(self, t: Term) -> Term:
        out, done = pars(t, self.fuel)
        if not done:
            raise FuelError(f"normalization ran out of fuel on {brief(t)}")
        return out

    def _whnf(self, t: Term) -> Term:
        out, done = whnf(t, self.fuel)
        if not done:
            raise FuelError(f"head normalization ran out of fuel on {brief(t)}")
        return out

    def _conv(self, a: Term, b: Term) -> bool:
        verdict = convertible(a, b, self.fuel)
        if verdict is Convertibility.UNDECIDED:
            raise FuelError(
                f"conversion undecided between {brief(a)} and {brief(b)}"
            )
        return verdict is Convertibility.YES

    def _concrete(self, t: Term) -> LevelValue | None:
        return t.value if isinstance(t, Lvl) else None

    # -- context judgments

    def ctx_derivation(self, ctx: Context) -> Derivation:
        cached = self._ctx_cache.get(ctx)
        if cached is not None:
            return cached
        if not ctx:
            d = Derivation("Nil", (), None, None)
        else:
            prefix = ctx[:-1]
            d_prefix = self.ctx_derivation(prefix)
            _, d_entry = self.infer_universe(prefix, ctx[-1])
            d = Derivation("Cons", ctx, None, None, (d_prefix, d_entry))
        self._ctx_cache[ctx] = d
        return d

    # -- derivation post-processing

    def _conv_to(self, d: Derivation, target: Term) -> Derivation:
        """Reuse ``d`` at a convertible type, inserting Conv if needed."""
        if alpha_equal(d.ty, target):
            return d
        if not self._conv(d.ty, target):
            raise TypingError(
                f"type mismatch: expected {brief(target)}, got {brief(d.ty)}"
            )
        _, d_target = self.infer_universe(d.ctx, target)
        return Derivation(
            "Conv",
            d.ctx,
            d.term,
            target,
            (d, d_target),
            (("fuel", self.fuel),),
        )

    def _univ_typing(self, ctx: Context, level: Term) -> Derivation:
        """Derivation of U level : U bound, for a well-typed level."""
        _, d = self.infer(ctx, Univ(level))
        return d

    # -- level machinery

    def infer_level(self, ctx: Context, t: Term) -> tuple[Term, Derivation]:
        """Type ``t`` as a level: a derivation of t : Level< bound."""
        ty, d = self.infer(ctx, t)
        if isinstance(ty, LevelLt):
            return ty.bound, d
        n = self._whnf(ty)
        if isinstance(n, LevelLt):
            return n.bound, self._conv_to(d, n)
        raise TypingError(f"not a level: {brief(t)} has type {brief(ty)}")

    def _bound_of(self, ctx: Context, t: Term) -> Term | None:
        """A bound strictly above the level term ``t``, if one can be
        synthesized cheaply: context entry, literal successor, or the
        annotation of a stuck elimination; otherwise full inference."""
        match t:
            case Var(ix):
                try:
                    entry = self._whnf(subst.ctx_lookup(ctx, ix))
                except IndexError:
                    return None
                return entry.bound if isinstance(entry, LevelLt) else None
            case Lvl(v):
                return Lvl(self.domain.next_above(v))
            case Absurd(ann, _):
                n = self._whnf(ann)
                return n.bound if isinstance(n, LevelLt) else None
            case _:
                try:
                    bound, _ = self.infer_level(ctx, t)
                except FuelError:
                    raise
                except TypingError:
                    return None
                return bound

    def level_below(self, ctx: Context, a: Term, b: Term, depth: int = CLIMB_CAP) -> bool:
        """Decide (soundly, not completely) that ``a : Level< b`` is
        derivable. Mirrors ``_derive_level_below`` without emission."""
        na, nb = self._norm(a), self._norm(b)
        va, vb = self._concrete(na), self._concrete(nb)
        if va is not None and vb is not None:
            return self.domain.lt(va, vb)
        order = LevelOrder(ctx, self.domain, self.fuel)
        if order.path(na, nb) is not None:
            return True
        if depth <= 0:
            return False
        bound = self._bound_of(ctx, na)
        if bound is None:
            return False
        nbound = self._norm(bound)
        if alpha_equal(nbound, nb) or self._conv(nbound, nb):
            return True
        if alpha_equal(nbound, na):
            return False
        return self.level_below(ctx, nbound, b, depth - 1)

    def _edge_derivation(self, ctx: Context, lo: Term, hi: Term) -> Derivation:
        """Derivation of lo : Level< hi for one reachability hop; both
        sides are normalized node terms."""
        match lo:
            case Var(ix):
                d = Derivation(
                    "Var",
                    ctx,
                    lo,
                    subst.ctx_lookup(ctx, ix),
                    (self.ctx_derivation(ctx),),
                )
                return self._conv_to(d, LevelLt(hi))
            case Lvl(va):
                match hi:
                    case Lvl(vb) if self.domain.lt(va, vb):
                        return Derivation(
                            "Lvl",
                            ctx,
                            lo,
                            LevelLt(hi),
                            (self.ctx_derivation(ctx),),
                            (("lo", va), ("hi", vb)),
                        )
                raise TypingError(
                    f"no literal step from {brief(lo)} to {brief(hi)}"
                )
        raise TypingError(f"no bound chain step from {brief(lo)} to {brief(hi)}")

    def _derive_level_below(
        self, ctx: Context, a: Term, b: Term, depth: int = CLIMB_CAP
    ) -> Derivation:
        """Derivation of a : Level< b. ``a`` and ``b`` should be
        normalized; raises TypingError when the strategy finds nothing."""
        va, vb = self._concrete(a), self._concrete(b)
        if va is not None and vb is not None:
            if not self.domain.lt(va, vb):
                raise TypingError(
                    f"level bound fails: {brief(a)} is not below {brief(b)}"
                )
            return Derivation(
                "Lvl",
                ctx,
                a,
                LevelLt(b),
                (self.ctx_derivation(ctx),),
                (("lo", va), ("hi", vb)),
            )
        order = LevelOrder(ctx, self.domain, self.fuel)
        trail = order.path(a, b)
        if trail is not None and len(trail) >= 2:
            d = self._edge_derivation(ctx, trail[0], trail[1])
            for nxt in trail[2:]:
                step = self._edge_derivation(ctx, d.ty.bound, nxt)
                d = Derivation("Trans", ctx, a, LevelLt(nxt), (d, step))
            return d
        if depth > 0:
            bound, d_a = self.infer_level(ctx, a)
            nbound = self._norm(bound)
            if self._conv(nbound, b):
                return self._conv_to(d_a, LevelLt(b))
            if not alpha_equal(nbound, a):
                d_lo = self._conv_to(d_a, LevelLt(nbound))
                d_hi = self._derive_level_below(ctx, nbound, b, depth - 1)
                return Derivation("Trans", ctx, a, LevelLt(b), (d_lo, d_hi))
        raise TypingError(
            f"level bound not established: {brief(a)} below {brief(b)}"
        )

    def derive_level_below(self, ctx: Context, a: Term, b: Term) -> Derivation:
        """Derivation of a : Level< b for arbitrary level terms; the
        subject is first normalized through its own typing."""
        na, nb = self._norm(a), self._norm(b)
        if alpha_equal(na, a):
            d = self._derive_level_below(ctx, a, nb)
        else:
            # The subject cannot be rewritten inside the judgment, so
            # type it directly and move only the bound.
            bound, d_a = self.infer_level(ctx, a)
            nbound = self._norm(bound)
            if self._conv(nbound, nb):
                return self._conv_to(d_a, LevelLt(b))
            d_lo = self._conv_to(d_a, LevelLt(nbound))
            d_hi = self._derive_level_below(ctx, nbound, nb)
            d = Derivation("Trans", ctx, a, LevelLt(nb), (d_lo, d_hi))
        return self._conv_to(d, LevelLt(b))

    def _cumul_to(self, d: Derivation, target_level: Term) -> Derivation:
        """Lift d : A : U k to A : U target_level."""
        assert isinstance(d.ty, Univ)
        k = d.ty.level
        if alpha_equal(k, target_level) or self._conv(k, target_level):
            return self._conv_to(d, Univ(target_level))
        nk = self._norm(k)
        nt = self._norm(target_level)
        d_lt = self._derive_level_below(d.ctx, nk, nt)
        d_at_nk = self._conv_to(d, Univ(nk))
        lifted = Derivation(
            "Cumul", d.ctx, d.term, Univ(nt), (d_at_nk, d_lt)
        )
        return self._conv_to(lifted, Univ(target_level))

    # -- universe joining (for Pi and Lam)

    def _chain(self, ctx: Context, k: Term) -> list[Term]:
        """Normalized bounds reachable upward from ``k`` (inclusive)."""
        out = [self._norm(k)]
        for _ in range(CLIMB_CAP):
            bound = self._bound_of(ctx, out[-1])
            if bound is None:
                break
            nb = self._norm(bound)
            if any(alpha_equal(nb, seen) for seen in out):
                break
            out.append(nb)
        return out

    def _level_le(self, ctx: Context, a: Term, b: Term) -> bool:
        return self._conv(a, b) or self.level_below(ctx, a, b)

    def _join_levels(self, ctx: Context, a: Term, b: Term) -> Term:
        if self._level_le(ctx, a, b):
            return b
        if self._level_le(ctx, b, a):
            return a
        for cand in self._chain(ctx, a):
            if self._level_le(ctx, b, cand):
                return cand
        for cand in self._chain(ctx, b):
            if self._level_le(ctx, a, cand):
                return cand
        raise TypingError(
            f"no common universe above {brief(a)} and {brief(b)}"
        )

    def _strengthen_level(self, ctx2: Context, k: Term) -> Term:
        """Rewrite a level valid under one extra binder into one that
        does not mention it, climbing bounds as needed; result is in the
        scope of ctx2 minus its last entry."""
        cur = self._norm(k)
        for _ in range(CLIMB_CAP):
            dropped = subst.strengthen(cur, 0)
            if dropped is not None:
                return dropped
            bound = self._bound_of(ctx2, cur)
            if bound is None:
                break
            nb = self._norm(bound)
            if alpha_equal(nb, cur):
                break
            cur = nb
        raise TypingError(
            f"universe level {brief(k)} depends on the binder with no bound above it"
        )

    # -- inference

    def infer_universe(self, ctx: Context, t: Term) -> tuple[Term, Derivation]:
        """Type ``t`` as a type: a derivation of t : U k."""
        ty, d = self.infer(ctx, t)
        if isinstance(ty, Univ):
            return ty.level, d
        n = self._whnf(ty)
        if isinstance(n, Univ):
            return n.level, self._conv_to(d, n)
        raise TypingError(f"not a type: {brief(t)} has type {brief(ty)}")

    def infer(self, ctx: Context, t: Term) -> tuple[Term, Derivation]:
        """Synthesize a type and its derivation. Raises TypingError on
        failure and FuelError when conversion gives out."""
        match t:
            case Var(ix):
                try:
                    ty = subst.ctx_lookup(ctx, ix)
                except IndexError:
                    raise TypingError(
                        f"unbound variable: index {ix} at depth {len(ctx)}"
                    ) from None
                return ty, Derivation("Var", ctx, t, ty, (self.ctx_derivation(ctx),))
            case Lvl(v):
                if not self.domain.contains(v):
                    raise TypingError(
                        f"level literal outside domain {self.domain.name}: {brief(t)}"
                    )
                up = Lvl(self.domain.next_above(v))
                ty = LevelLt(up)
                return ty, Derivation(
                    "Lvl",
                    ctx,
                    t,
                    ty,
                    (self.ctx_derivation(ctx),),
                    (("lo", v), ("hi", up.value)),
                )
            case Mty():
                zero = Lvl(self.domain.zero())
                d_univ = self._univ_typing(ctx, zero)
                return Univ(zero), Derivation(
                    "Mty", ctx, t, Univ(zero), (d_univ,)
                )
            case Pi(dom, cod):
                k_dom, d_dom = self.infer_universe(ctx, dom)
                ctx2 = subst.ctx_extend(ctx, dom)
                k_cod, d_cod = self.infer_universe(ctx2, cod)
                k_cod0 = self._strengthen_level(ctx2, k_cod)
                k = self._join_levels(ctx, self._norm(k_dom), k_cod0)
                d_dom2 = self._cumul_to(d_dom, k)
                d_cod2 = self._cumul_to(d_cod, subst.shift(k, 1, 0))
                ty = Univ(k)
                return ty, Derivation("Pi", ctx, t, ty, (d_dom2, d_cod2))
            case Lam(ann, body):
                _, d_ann = self.infer_universe(ctx, ann)
                ctx2 = subst.ctx_extend(ctx, ann)
                body_ty, d_body = self.infer(ctx2, body)
                pi_ty = Pi(ann, body_ty)
                k_pi, d_pi = self.infer_universe(ctx, pi_ty)
                d_ann2 = self._cumul_to(d_ann, k_pi)
                return pi_ty, Derivation(
                    "Lam", ctx, t, pi_ty, (d_ann2, d_pi, d_body)
                )
            case App(fn, arg):
                fn_ty, d_fn = self.infer(ctx, fn)
                head = self._whnf(fn_ty)
                if not isinstance(head, Pi):
                    raise TypingError(
                        f"application of a non-function: {brief(fn)} "
                        f"has type {brief(fn_ty)}"
                    )
                d_fn2 = self._conv_to(d_fn, head)
                res = self.check(ctx, arg, head.dom)
                if res.verdict is Verdict.UNDECIDED:
                    raise FuelError(res.message)
                if not res:
                    raise TypingError(f"argument mismatch: {res.message}")
                ty = subst.subst1(head.cod, arg)
                return ty, Derivation(
                    "App", ctx, t, ty, (d_fn2, res.derivation)
                )
            case Absurd(ann, scrut):
                _, d_ann = self.infer_universe(ctx, ann)
                res = self.check(ctx, scrut, Mty())
                if res.verdict is Verdict.UNDECIDED:
                    raise FuelError(res.message)
                if not res:
                    raise TypingError(
                        f"absurdity scrutinee is not a refutation: {res.message}"
                    )
                return ann, Derivation(
                    "Abs", ctx, t, ann, (d_ann, res.derivation)
                )
            case Univ(level):
                bound, d_level = self.infer_level(ctx, level)
                ty = Univ(bound)
                return ty, Derivation("Univ", ctx, t, ty, (d_level,))
            case LevelLt(bound):
                _, d_bound = self.infer_level(ctx, bound)
                zero = Lvl(self.domain.zero())
                d_univ = self._univ_typing(ctx, zero)
                ty = Univ(zero)
                return ty, Derivation(
                    "LevelLt", ctx, t, ty, (d_univ, d_bound)
                )
        raise TypeError(f"Unexpected term in infer: {t!r}")

    # -- checking

    def check(self, ctx: Context, t: Term, expected: Term) -> CheckResult:
        try:
            d = self._check(ctx, t, expected)
        except FuelError as e:
            return CheckResult(Verdict.UNDECIDED, str(e))
        except TypingError as e:
            return CheckResult(Verdict.REJECTED, str(e))
        return CheckResult(Verdict.ACCEPTED, derivation=d)

    def _check(self, ctx: Context, t: Term, expected: Term) -> Derivation:
        head = self._whnf(expected)
        match (t, head):
            case (Lam(ann, body), Pi(dom, cod)):
                if not self._conv(ann, dom):
                    raise TypingError(
                        f"domain annotation mismatch: {brief(ann)} vs {brief(dom)}"
                    )
                _, d_ann = self.infer_universe(ctx, ann)
                ctx2 = subst.ctx_extend(ctx, ann)
                d_body = self._must(self.check(ctx2, body, cod))
                own_ty = Pi(ann, cod)
                k_pi, d_pi = self.infer_universe(ctx, own_ty)
                d_ann2 = self._cumul_to(d_ann, k_pi)
                d = Derivation(
                    "Lam", ctx, t, own_ty, (d_ann2, d_pi, d_body)
                )
                return self._conv_to(d, expected)
            case (Pi(dom, cod), Univ(level)):
                d_dom = self._must(self.check(ctx, dom, Univ(level)))
                ctx2 = subst.ctx_extend(ctx, dom)
                lifted = Univ(subst.shift(level, 1, 0))
                d_cod = self._must(self.check(ctx2, cod, lifted))
                d = Derivation("Pi", ctx, t, Univ(level), (d_dom, d_cod))
                return self._conv_to(d, expected)
            case (Mty(), Univ(level)):
                d_univ = self._univ_typing(ctx, level)
                d = Derivation("Mty", ctx, t, Univ(level), (d_univ,))
                return self._conv_to(d, expected)
            case (LevelLt(bound), Univ(level)):
                d_univ = self._univ_typing(ctx, level)
                _, d_bound = self.infer_level(ctx, bound)
                d = Derivation(
                    "LevelLt", ctx, t, Univ(level), (d_univ, d_bound)
                )
                return self._conv_to(d, expected)
            case (Univ(k), Univ(level)):
                d_lt = self._must(self.check(ctx, k, LevelLt(level)))
                d = Derivation("Univ", ctx, t, Univ(level), (d_lt,))
                return self._conv_to(d, expected)
            case (Lvl(v), LevelLt(bound)):
                nb = self._norm(bound)
                match nb:
                    case Lvl(w):
                        if not self.domain.lt(v, w):
                            raise TypingError(
                                f"level bound fails: {brief(t)} is not below {brief(nb)}"
                            )
                        d = Derivation(
                            "Lvl",
                            ctx,
                            t,
                            LevelLt(nb),
                            (self.ctx_derivation(ctx),),
                            (("lo", v), ("hi", w)),
                        )
                        return self._conv_to(d, expected)
                    case _:
                        return self._subsume(ctx, t, expected)
            case _:
                return self._subsume(ctx, t, expected)

    def _must(self, res: CheckResult) -> Derivation:
        if res.verdict is Verdict.UNDECIDED:
            raise FuelError(res.message)
        if not res:
            raise TypingError(res.message)
        assert res.derivation is not None
        return res.derivation

    def _subsume(self, ctx: Context, t: Term, expected: Term) -> Derivation:
        actual, d = self.infer(ctx, t)
        if alpha_equal(actual, expected) or self._conv(actual, expected):
            return self._conv_to(d, expected)
        n_actual = self._norm(actual)
        n_expected = self._norm(expected)
        match (n_actual, n_expected):
            case (Univ(_), Univ(target)):
                d_at = self._conv_to(d, n_actual)
                lifted = self._cumul_to(d_at, target)
                return self._conv_to(lifted, expected)
            case (LevelLt(lo), LevelLt(hi)):
                d_at = self._conv_to(d, n_actual)
                d_hi = self._derive_level_below(ctx, self._norm(lo), self._norm(hi))
                d2 = Derivation(
                    "Trans", ctx, t, LevelLt(self._norm(hi)), (d_at, d_hi)
                )
                return self._conv_to(d2, expected)
            case _:
                raise TypingError(
                    f"type mismatch: expected {brief(expected)}, got {brief(actual)}"
                )

    def check_context(self, ctx: Context) -> CheckResult:
        try:
            d = self.ctx_derivation(ctx)
        except FuelError as e:
            return CheckResult(Verdict.UNDECIDED, str(e))
        except TypingError as e:
            return CheckResult(Verdict.REJECTED, str(e))
        return CheckResult(Verdict.ACCEPTED, derivation=d)


# ---------------------------------------------------------------------------
# Module-level entry points


def infer(
    ctx: Context,
    t: Term,
    domain: LevelDomain = NAT_OMEGA,
    fuel: int = DEFAULT_FUEL,
) -> Term:
    """Synthesized type of ``t``; raises TypingError (or FuelError)."""
    ty, _ = TypeChecker(domain, fuel).infer(ctx, t)
    return ty


def infer_with_derivation(
    ctx: Context,
    t: Term,
    domain: LevelDomain = NAT_OMEGA,
    fuel: int = DEFAULT_FUEL,
) -> tuple[Term, Derivation]:
    return TypeChecker(domain, fuel).infer(ctx, t)


def check(
    ctx: Context,
    t: Term,
    expected: Term,
    domain: LevelDomain = NAT_OMEGA,
    fuel: int = DEFAULT_FUEL,
) -> CheckResult:
    return TypeChecker(domain, fuel).check(ctx, t, expected)


def check_context(
    ctx: Context,
    domain: LevelDomain = NAT_OMEGA,
    fuel: int = DEFAULT_FUEL,
) -> CheckResult:
    return TypeChecker(domain, fuel).check_context(ctx)


def level_lt_check(
    ctx: Context,
    lo: Term,
    hi: Term,
    domain: LevelDomain = NAT_OMEGA,
    fuel: int = DEFAULT_FUEL,
) -> bool:
    """Fast strict-bound test: normalize, compare literals, then walk
    context-declared bound chains. Sound; incomplete by design."""
    n_lo, done_lo = pars(lo, fuel)
    n_hi, done_hi = pars(hi, fuel)
    if not (done_lo and done_hi):
        return False
    match (n_lo, n_hi):
        case (Lvl(a), Lvl(b)):
            return domain.lt(a, b)
        case _:
            order = LevelOrder(ctx, domain, fuel)
            return order.path(n_lo, n_hi) is not None


def elaborate_lam_prime(
    d_pi: Derivation,
    d_body: Derivation,
    domain: LevelDomain = NAT_OMEGA,
    fuel: int = DEFAULT_FUEL,
) -> Derivation:
    """Assemble the abstraction rule from a function-type derivation and
    a body derivation, inverting the former for the shared universe.

    d_pi must conclude ctx |- Pi A B : U k by the function-type rule
    (peeling conversions and cumulativity steps), and d_body must
    conclude ctx, A |- b : B.
    """
    core = d_pi
    while core.rule in ("Conv", "Cumul"):
        core = core.premises[0]
    if core.rule != "Pi":
        raise TypingError(
            f"inversion failed: expected a function-type conclusion, "
            f"got rule {core.rule} concluding {brief(core.term)} : {brief(core.ty)}"
        )
    match (core.term, core.ty):
        case (Pi(dom, cod), Univ(_)):
            pass
        case _:
            raise TypingError("inversion failed: malformed function-type node")
    d_dom = core.premises[0]
    if d_body.ctx != subst.ctx_extend(core.ctx, dom):
        raise TypingError("body judgment context does not extend the domain")
    if not alpha_equal(d_body.ty, cod):
        raise TypingError(
            f"body type {brief(d_body.ty)} differs from the codomain {brief(cod)}"
        )
    lam = Lam(dom, d_body.term)
    return Derivation(
        "Lam",
        core.ctx,
        lam,
        core.term,
        (d_dom, core, d_body),
    )


# ---------------------------------------------------------------------------
# Bounded derivation search


def search_derivation(
    ctx: Context,
    t: Term,
    ty: Term,
    domain: LevelDomain = NAT_OMEGA,
    depth: int = 8,
    fuel: int = DEFAULT_FUEL,
) -> Derivation | None:
    """Backward search for a derivation of ctx |- t : ty, up to
    ``depth`` nested rule applications. Exhaustive over a finite
    candidate set for the non-syntax-directed rules, so a None answer
    means no derivation exists within the depth for that candidate
    universe of intermediate levels."""
    checker = TypeChecker(domain, fuel)

    def conv_ok(a: Term, b: Term) -> bool:
        return convertible(a, b, fuel) is Convertibility.YES

    candidates: list[Term] = []
    seen_c: set[Term] = set()
    for root in [t, ty, *ctx]:
        for sub in iter_subterms(root):
            n, done = pars(sub, fuel)
            if done and n not in seen_c:
                seen_c.add(n)
                candidates.append(n)

    # Memo: (subject, type) -> (settled_depth, derivation or None). A
    # success is final; a failure at depth d also covers every d' <= d.
    memo: dict[tuple[Term, Term], tuple[int, Derivation | None]] = {}

    def attempt(goal_t: Term, goal_ty: Term, d: int) -> Derivation | None:
        if d <= 0:
            return None
        key = (goal_t, goal_ty)
        hit = memo.get(key)
        if hit is not None:
            settled, found = hit
            if found is not None or settled >= d:
                return found
        res = checker.check(ctx, goal_t, goal_ty)
        if res and check_derivation(res.derivation, domain, fuel).ok:
            memo[key] = (d, res.derivation)
            return res.derivation
        n_ty, done = pars(goal_ty, fuel)
        if done:
            # Transitivity / cumulativity through candidate middles.
            for mid in candidates:
                if isinstance(n_ty, LevelLt) and not conv_ok(mid, n_ty.bound):
                    lo = attempt(goal_t, LevelLt(mid), d - 1)
                    hi = lo and attempt(mid, LevelLt(n_ty.bound), d - 1)
                    if lo and hi:
                        trans = Derivation(
                            "Trans", ctx, goal_t, LevelLt(n_ty.bound), (lo, hi)
                        )
                        if check_derivation(trans, domain, fuel).ok:
                            memo[key] = (d, trans)
                            return trans
                if isinstance(n_ty, Univ) and not conv_ok(mid, n_ty.level):
                    at = attempt(goal_t, Univ(mid), d - 1)
                    lt = at and attempt(mid, LevelLt(n_ty.level), d - 1)
                    if at and lt:
                        cum = Derivation(
                            "Cumul", ctx, goal_t, Univ(n_ty.level), (at, lt)
                        )
                        if check_derivation(cum, domain, fuel).ok:
                            memo[key] = (d, cum)
                            return cum
        memo[key] = (d, None)
        return None

    return attempt(t, ty, depth)
