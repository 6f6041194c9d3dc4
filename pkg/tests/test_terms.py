"""Structural operations on the core syntax."""

from __future__ import annotations

from hypothesis import given

from gen import terms
from named_oracle import alpha_eq_named, to_named
from ulevels.levels import Finite
from ulevels.terms import (
    App,
    Absurd,
    Lam,
    LevelLt,
    Lvl,
    Mty,
    Pi,
    Univ,
    Var,
    alpha_equal,
    free_above,
    is_closed,
    is_value,
    iter_subterms,
    term_size,
)


def test_is_value_heads():
    assert is_value(Lvl(Finite(0)))
    assert is_value(Pi(Mty(), Mty()))
    assert is_value(Lam(Mty(), Var(0)))
    assert is_value(Mty())
    assert is_value(Univ(Lvl(Finite(0))))
    assert is_value(LevelLt(Lvl(Finite(1))))
    assert not is_value(Var(0))
    assert not is_value(App(Lam(Mty(), Var(0)), Mty()))
    assert not is_value(Absurd(Mty(), Var(0)))


def test_free_above_frozen_values():
    assert free_above(Pi(Mty(), Var(1)), 0)
    assert not free_above(Pi(Mty(), Var(0)), 0)
    assert free_above(Var(3), 3)
    assert not free_above(Var(2), 3)
    assert is_closed(Lam(Mty(), Var(0)))
    assert not is_closed(App(Var(0), Mty()))


@given(terms(free=0))
def test_generated_closed_terms_are_closed(t):
    assert is_closed(t)


@given(terms(free=3))
def test_free_above_monotone_in_depth(t):
    # Raising the threshold can only lose witnesses.
    for d in range(4):
        if not free_above(t, d):
            assert not free_above(t, d + 1)


@given(terms(free=2))
def test_alpha_equal_is_equality_and_matches_named_rendering(t):
    assert alpha_equal(t, t)
    env = ["a", "b"]
    assert alpha_eq_named(to_named(t, env), to_named(t, env))


def test_alpha_equal_distinguishes_structure():
    assert not alpha_equal(Lam(Mty(), Var(0)), Lam(Mty(), Var(1)))
    assert not alpha_equal(Pi(Mty(), Mty()), Lam(Mty(), Mty()))


@given(terms(free=2))
def test_term_size_counts_every_subterm(t):
    assert term_size(t) == sum(1 for _ in iter_subterms(t))


def test_term_size_frozen():
    assert term_size(Mty()) == 1
    assert term_size(App(Lam(Mty(), Var(0)), Mty())) == 5
