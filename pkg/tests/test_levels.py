"""Level domain order, successor, and literal syntax."""

from __future__ import annotations

import pytest
from hypothesis import given

from gen import level_values, finite_levels
from ulevels.levels import (
    NAT,
    NAT_OMEGA,
    Finite,
    LevelSyntaxError,
    OmegaPlus,
    Ordering,
    domain_named,
)


def test_lt_frozen_values():
    assert NAT.lt(Finite(0), Finite(1))
    assert not NAT.lt(Finite(2), Finite(2))
    assert NAT_OMEGA.lt(Finite(1_000_000), OmegaPlus(0))
    assert not NAT_OMEGA.lt(OmegaPlus(0), Finite(1_000_000))


def test_next_above_frozen_values():
    assert NAT.next_above(Finite(3)) == Finite(4)
    assert NAT_OMEGA.next_above(Finite(7)) == Finite(8)
    assert NAT_OMEGA.next_above(OmegaPlus(0)) == OmegaPlus(1)


def _table_compare(a, b) -> Ordering:
    # Independent small-value table: rank both tiers lexicographically.
    def rank(v):
        return (0, v.n) if isinstance(v, Finite) else (1, v.n)

    ra, rb = rank(a), rank(b)
    if ra < rb:
        return Ordering.LESS
    if ra > rb:
        return Ordering.GREATER
    return Ordering.EQUAL


SMALL = [Finite(n) for n in range(13)] + [OmegaPlus(n) for n in range(13)]


def test_compare_matches_exhaustive_small_table():
    for a in SMALL:
        for b in SMALL:
            assert NAT_OMEGA.compare(a, b) == _table_compare(a, b), (a, b)


def test_compare_frozen_value():
    assert NAT_OMEGA.compare(OmegaPlus(0), Finite(9)) == Ordering.GREATER


@given(level_values)
def test_successor_is_strictly_above_and_same_tier(a):
    b = NAT_OMEGA.next_above(a)
    assert NAT_OMEGA.lt(a, b)
    assert type(a) is type(b)


@given(level_values, level_values)
def test_trichotomy(a, b):
    verdicts = [
        NAT_OMEGA.lt(a, b),
        a == b,
        NAT_OMEGA.lt(b, a),
    ]
    assert verdicts.count(True) == 1


@given(level_values, level_values, level_values)
def test_transitivity(a, b, c):
    if NAT_OMEGA.lt(a, b) and NAT_OMEGA.lt(b, c):
        assert NAT_OMEGA.lt(a, c)


@given(level_values)
def test_wellfoundedness_via_rank(a):
    # Any strict descent lowers the lexicographic (tier, offset) rank,
    # which lives in nat^2, so descending chains are finite.
    def rank(v):
        return (0, v.n) if isinstance(v, Finite) else (1, v.n)

    for b in SMALL:
        if NAT_OMEGA.lt(b, a):
            assert rank(b) < rank(a)


@pytest.mark.parametrize(
    "text,value",
    [
        ("0", Finite(0)),
        ("7", Finite(7)),
        ("120", Finite(120)),
        ("omega", OmegaPlus(0)),
        ("omega+1", OmegaPlus(1)),
        ("omega+42", OmegaPlus(42)),
    ],
)
def test_parse_literal(text, value):
    assert NAT_OMEGA.parse_literal(text) == value


@pytest.mark.parametrize("text", ["", "007", "-1", "omega+0", "omega+", "w", "omega +1"])
def test_parse_literal_rejects(text):
    with pytest.raises(LevelSyntaxError):
        NAT_OMEGA.parse_literal(text)


def test_nat_domain_rejects_omega_literals():
    with pytest.raises(LevelSyntaxError):
        NAT.parse_literal("omega")
    assert NAT.parse_literal("3") == Finite(3)


@given(level_values)
def test_format_parse_roundtrip(a):
    assert NAT_OMEGA.parse_literal(NAT_OMEGA.format_literal(a)) == a


@given(finite_levels)
def test_nat_format_parse_roundtrip(a):
    assert NAT.parse_literal(NAT.format_literal(a)) == a


def test_domain_registry():
    assert domain_named("nat") is NAT
    assert domain_named("nat-omega") is NAT_OMEGA
    with pytest.raises(LevelSyntaxError):
        domain_named("ordinal")


def test_membership():
    assert NAT.contains(Finite(5))
    assert not NAT.contains(OmegaPlus(0))
    assert NAT_OMEGA.contains(OmegaPlus(3))


def test_zero_and_sampling_stay_in_domain():
    import random

    rng = random.Random(7)
    assert NAT.zero() == Finite(0)
    for _ in range(200):
        assert NAT.contains(NAT.sample(rng))
        assert NAT_OMEGA.contains(NAT_OMEGA.sample(rng))
        below = NAT_OMEGA.sample_below(rng, OmegaPlus(2))
        assert below is not None and NAT_OMEGA.lt(below, OmegaPlus(2))
    assert NAT.sample_below(rng, Finite(0)) is None
    assert NAT_OMEGA.sample_below(rng, Finite(0)) is None
