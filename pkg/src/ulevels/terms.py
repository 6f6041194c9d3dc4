"""Core term syntax with de Bruijn indices.

Binders (``Pi``, ``Lam``) carry no names; ``Var(0)`` is the innermost
binding. Contexts are tuples of types, innermost entry last; an entry is
stated in the context prefix to its left, so lookups must shift (see the
substitution module).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .levels import LevelValue

__all__ = [
    "Var",
    "Lvl",
    "Pi",
    "Lam",
    "App",
    "Mty",
    "Absurd",
    "Univ",
    "LevelLt",
    "Term",
    "Context",
    "is_value",
    "free_above",
    "is_closed",
    "alpha_equal",
    "term_size",
    "iter_subterms",
]


@dataclass(frozen=True)
class Var:
    """A bound or context variable, by de Bruijn index."""

    ix: int


@dataclass(frozen=True)
class Lvl:
    """A concrete level literal."""

    value: LevelValue


@dataclass(frozen=True)
class Pi:
    """Dependent function type; ``cod`` binds one variable."""

    dom: "Term"
    cod: "Term"


@dataclass(frozen=True)
class Lam:
    """Annotated abstraction; ``body`` binds one variable."""

    ann: "Term"
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Mty:
    """The empty type."""


@dataclass(frozen=True)
class Absurd:
    """Eliminate a proof of the empty type at the annotated type."""

    ann: "Term"
    scrut: "Term"


@dataclass(frozen=True)
class Univ:
    """The universe at the given level term."""

    level: "Term"


@dataclass(frozen=True)
class LevelLt:
    """The type of levels strictly below the given bound term."""

    bound: "Term"


Term = Union[Var, Lvl, Pi, Lam, App, Mty, Absurd, Univ, LevelLt]

Context = tuple[Term, ...]


def is_value(term: Term) -> bool:
    """Weak-head values: every introduction and type former."""
    return isinstance(term, (Lvl, Pi, Lam, Mty, Univ, LevelLt))


def free_above(term: Term, depth: int) -> bool:
    """Does ``term`` mention a free variable with index >= ``depth``?"""
    match term:
        case Var(ix):
            return ix >= depth
        case Lvl(_) | Mty():
            return False
        case Pi(dom, cod):
            return free_above(dom, depth) or free_above(cod, depth + 1)
        case Lam(ann, body):
            return free_above(ann, depth) or free_above(body, depth + 1)
        case App(fn, arg):
            return free_above(fn, depth) or free_above(arg, depth)
        case Absurd(ann, scrut):
            return free_above(ann, depth) or free_above(scrut, depth)
        case Univ(level):
            return free_above(level, depth)
        case LevelLt(bound):
            return free_above(bound, depth)
    raise TypeError(f"Unexpected term in free_above: {term!r}")


def is_closed(term: Term) -> bool:
    return not free_above(term, 0)


def alpha_equal(a: Term, b: Term) -> bool:
    """Alpha equivalence; with de Bruijn syntax this is plain equality."""
    return a == b


def term_size(term: Term) -> int:
    match term:
        case Var(_) | Lvl(_) | Mty():
            return 1
        case Pi(a, b) | Lam(a, b) | App(a, b) | Absurd(a, b):
            return 1 + term_size(a) + term_size(b)
        case Univ(a) | LevelLt(a):
            return 1 + term_size(a)
    raise TypeError(f"Unexpected term in term_size: {term!r}")


def iter_subterms(term: Term) -> Iterator[Term]:
    """Yield ``term`` and every subterm, preorder."""
    yield term
    match term:
        case Var(_) | Lvl(_) | Mty():
            return
        case Pi(a, b) | Lam(a, b) | App(a, b) | Absurd(a, b):
            yield from iter_subterms(a)
            yield from iter_subterms(b)
        case Univ(a) | LevelLt(a):
            yield from iter_subterms(a)
        case _:
            raise TypeError(f"Unexpected term in iter_subterms: {term!r}")
