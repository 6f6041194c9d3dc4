"""Shifting and substitution for de Bruijn terms.

A ``Subst`` carries explicit images for the first ``len(prefix)``
indices and renames every later index ``len(prefix) + j`` to
``Var(shift + j)``. Composition stays in this representation, so the
usual simultaneous-substitution laws can be checked directly.
"""

from __future__ import annotations

from dataclasses import dataclass

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
)

__all__ = [
    "shift",
    "Subst",
    "identity_subst",
    "lift",
    "apply",
    "compose",
    "subst1",
    "strengthen",
    "ctx_extend",
    "ctx_lookup",
]


def shift(term: Term, by: int, cutoff: int = 0) -> Term:
    """Add ``by`` to every free variable index at or above ``cutoff``."""
    match term:
        case Var(ix):
            return Var(ix + by) if ix >= cutoff else term
        case Lvl(_) | Mty():
            return term
        case Pi(dom, cod):
            return Pi(shift(dom, by, cutoff), shift(cod, by, cutoff + 1))
        case Lam(ann, body):
            return Lam(shift(ann, by, cutoff), shift(body, by, cutoff + 1))
        case App(fn, arg):
            return App(shift(fn, by, cutoff), shift(arg, by, cutoff))
        case Absurd(ann, scrut):
            return Absurd(shift(ann, by, cutoff), shift(scrut, by, cutoff))
        case Univ(level):
            return Univ(shift(level, by, cutoff))
        case LevelLt(bound):
            return LevelLt(shift(bound, by, cutoff))
    raise TypeError(f"Unexpected term in shift: {term!r}")


@dataclass(frozen=True)
class Subst:
    """Images for indices 0..k-1, then ``k + j -> Var(shift + j)``."""

    prefix: tuple[Term, ...]
    shift: int

    def image(self, ix: int) -> Term:
        if ix < len(self.prefix):
            return self.prefix[ix]
        return Var(ix - len(self.prefix) + self.shift)


def identity_subst() -> Subst:
    return Subst((), 0)


def lift(s: Subst) -> Subst:
    """Push a substitution under one binder: 0 stays, images move up."""
    moved = tuple(shift(t, 1, 0) for t in s.prefix)
    return Subst((Var(0),) + moved, s.shift + 1)


def apply(s: Subst, term: Term) -> Term:
    match term:
        case Var(ix):
            return s.image(ix)
        case Lvl(_) | Mty():
            return term
        case Pi(dom, cod):
            return Pi(apply(s, dom), apply(lift(s), cod))
        case Lam(ann, body):
            return Lam(apply(s, ann), apply(lift(s), body))
        case App(fn, arg):
            return App(apply(s, fn), apply(s, arg))
        case Absurd(ann, scrut):
            return Absurd(apply(s, ann), apply(s, scrut))
        case Univ(level):
            return Univ(apply(s, level))
        case LevelLt(bound):
            return LevelLt(apply(s, bound))
    raise TypeError(f"Unexpected term in apply: {term!r}")


def compose(outer: Subst, inner: Subst) -> Subst:
    """The substitution applying ``inner`` first, then ``outer``.

    apply(compose(outer, inner), t) == apply(outer, apply(inner, t)).
    """
    k = len(inner.prefix)
    prefix = [apply(outer, t) for t in inner.prefix]
    # Tail of inner feeds Var(inner.shift + j) into outer; pull the
    # entries still covered by outer's prefix into the new prefix.
    extra = len(outer.prefix) - inner.shift
    if extra > 0:
        for j in range(extra):
            prefix.append(outer.image(inner.shift + j))
        return Subst(tuple(prefix), outer.shift)
    return Subst(tuple(prefix), inner.shift - len(outer.prefix) + outer.shift)


def subst1(body: Term, arg: Term) -> Term:
    """Replace Var(0) in ``body`` by ``arg``; later indices drop by one."""
    return apply(Subst((arg,), 0), body)


def strengthen(term: Term, depth: int = 0) -> Term | None:
    """Remove the binder at ``depth``: None if ``Var(depth)`` occurs free,
    otherwise the term with indices above ``depth`` decremented."""
    match term:
        case Var(ix):
            if ix == depth:
                return None
            return Var(ix - 1) if ix > depth else term
        case Lvl(_) | Mty():
            return term
        case Pi(a, b) | Lam(a, b):
            sa = strengthen(a, depth)
            sb = strengthen(b, depth + 1)
            if sa is None or sb is None:
                return None
            return type(term)(sa, sb)
        case App(a, b) | Absurd(a, b):
            sa = strengthen(a, depth)
            sb = strengthen(b, depth)
            if sa is None or sb is None:
                return None
            return type(term)(sa, sb)
        case Univ(a) | LevelLt(a):
            sa = strengthen(a, depth)
            return None if sa is None else type(term)(sa)
    raise TypeError(f"Unexpected term in strengthen: {term!r}")


def ctx_extend(ctx: Context, ty: Term) -> Context:
    return ctx + (ty,)


def ctx_lookup(ctx: Context, ix: int) -> Term:
    """Type of Var(ix), shifted past the binders declared after it."""
    if not 0 <= ix < len(ctx):
        raise IndexError(f"variable index {ix} out of scope (depth {len(ctx)})")
    return shift(ctx[-1 - ix], ix + 1, 0)
