"""Surface syntax: lexing, parsing, resolution, printing, module checks."""

from __future__ import annotations

import pytest
from hypothesis import given, settings

from ulevels.levels import NAT, NAT_OMEGA, Finite, OmegaPlus
from ulevels.surface import (
    Module,
    SurfaceError,
    check_module,
    format_report,
    lex,
    parse,
    parse_expr,
    pretty,
    resolve,
)
from ulevels.terms import (
    Absurd,
    App,
    Lam,
    LevelLt,
    Lvl,
    Mty,
    Pi,
    Univ,
    Var,
)

from gen import terms


def rt(source: str, domain=NAT_OMEGA):
    return resolve(parse_expr(source), (), {}, domain)


# ---------------------------------------------------------------------------
# Lexing


def test_lex_skips_comments_and_tracks_lines():
    toks = lex("-- intro\ndef x : U 0 := Bot\n")
    kinds = [t.kind for t in toks]
    assert kinds == ["kw", "ident", "colon", "kw", "level", "coloneq", "kw", "eof"]
    assert toks[0].line == 2


def test_lex_level_literals():
    toks = lex("0 42 omega omega+3 omegaFun")
    assert [(t.kind, t.text) for t in toks[:-1]] == [
        ("level", "0"),
        ("level", "42"),
        ("level", "omega"),
        ("level", "omega+3"),
        ("ident", "omegaFun"),
    ]


def test_lex_rejects_leading_zero_numerals():
    with pytest.raises(SurfaceError):
        lex("007")


def test_lex_rejects_stray_characters():
    with pytest.raises(SurfaceError):
        lex("def a : U 0 := %")


# ---------------------------------------------------------------------------
# Expressions: parse + resolve


def test_resolve_nested_pi_with_arrow():
    t = rt("Pi (x : Level< omega) . Pi (y : U x) . y -> y")
    assert t == Pi(
        LevelLt(Lvl(OmegaPlus(0))),
        Pi(Univ(Var(0)), Pi(Var(0), Var(1))),
    )


def test_arrow_is_right_associative():
    t = rt("U 0 -> U 1 -> U 2")
    assert t == Pi(
        Univ(Lvl(Finite(0))),
        Pi(Univ(Lvl(Finite(1))), Univ(Lvl(Finite(2)))),
    )


def test_application_is_left_associative():
    t = rt("fun (f : U 0) . fun (a : U 0) . fun (b : U 0) . f a b")
    body = t.body.body.body
    assert body == App(App(Var(2), Var(1)), Var(0))


def test_absurd_annotation_brackets():
    t = rt("fun (x : Bot) . absurd [Level< 0] x")
    assert t == Lam(Mty(), Absurd(LevelLt(Lvl(Finite(0))), Var(0)))


def test_shadowing_picks_innermost_binder():
    t = rt("fun (x : U 0) . fun (x : U 1) . x")
    assert t == Lam(Univ(Lvl(Finite(0))), Lam(Univ(Lvl(Finite(1))), Var(0)))


def test_multi_binder_groups_desugar():
    a = rt("Pi (x : Level< 3) (y : Level< x) . Level< omega")
    b = rt("Pi (x : Level< 3) . Pi (y : Level< x) . Level< omega")
    assert a == b


def test_level_literal_outside_domain_is_a_surface_error():
    with pytest.raises(SurfaceError):
        rt("U omega", domain=NAT)


def test_unknown_identifier():
    with pytest.raises(SurfaceError, match="unknown identifier"):
        rt("fun (x : U 0) . missing")


def test_binderless_pi_rejected():
    with pytest.raises(SurfaceError):
        parse_expr("Pi . U 0")


def test_unbalanced_parens_rejected():
    with pytest.raises(SurfaceError):
        parse_expr("(U 0")


# ---------------------------------------------------------------------------
# Modules and pragmas


def test_parse_module_pragmas_and_fail_marker():
    mod = parse(
        """
        #domain nat
        #fuel 50
        def a : U 1 := U 0
        #fail
        def b : U 0 := U 0
        """
    )
    assert mod.domain_name == "nat"
    assert mod.fuel == 50
    assert [d.name for d in mod.defs] == ["a", "b"]
    assert [d.expect_fail for d in mod.defs] == [False, True]


def test_duplicate_definition_rejected():
    with pytest.raises(SurfaceError, match="duplicate"):
        parse("def a : U 1 := U 0\ndef a : U 1 := U 0\n")


def test_definitions_are_transparent():
    mod = parse(
        """
        def Small : U 1 := U 0
        def again : U 1 := Small
        """
    )
    report = check_module(mod)
    assert report.ok
    assert [e.name for e in report.entries] == ["Small", "again"]


def test_failed_definitions_are_not_usable_later():
    mod = parse(
        """
        #fail
        def broken : U 0 := U 0
        def uses : U 1 := broken
        """
    )
    with pytest.raises(SurfaceError, match="unknown identifier"):
        check_module(mod)


def test_explicit_arguments_override_pragmas():
    mod = parse("#domain nat\ndef a : U 1 := U 0\n")
    report = check_module(mod, domain_name="nat-omega", fuel=123)
    assert report.domain_name == "nat-omega"
    assert report.fuel == 123


# ---------------------------------------------------------------------------
# Pretty printing


def test_pretty_poly_identity_type():
    t = Pi(LevelLt(Lvl(OmegaPlus(0))), Pi(Univ(Var(0)), Pi(Var(0), Var(1))))
    assert pretty(t) == "Pi (x : Level< omega) . Pi (y : U x) . y -> y"


def test_pretty_arrow_and_application_parens():
    t = rt("fun (f : U 2 -> U 0) . fun (x : U 1) . f x")
    assert pretty(t) == "fun (x : U 2 -> U 0) . fun (y : U 1) . x y"


def test_pretty_parenthesizes_arrow_domains():
    t = rt("(U 0 -> U 0) -> U 1")
    assert pretty(t) == "(U 0 -> U 0) -> U 1"


def test_pretty_level_literals():
    assert pretty(Lvl(OmegaPlus(4))) == "omega+4"
    assert pretty(Lvl(Finite(0))) == "0"


@settings(max_examples=300, deadline=None)
@given(terms(free=0))
def test_pretty_parse_resolve_round_trip(t):
    assert rt(pretty(t)) == t


# ---------------------------------------------------------------------------
# Module reports


IDENTITY_SOURCE = """\
-- Identity functions across universe levels.
def Id : U omega := Pi (k : Level< omega) (A : U k) . A -> A
def idFun : Id := fun (k : Level< omega) (A : U k) (a : A) . a
def idAtOne : Pi (A : U 1) . A -> A := idFun 1
"""


def test_identity_module_report_text():
    report = check_module(parse(IDENTITY_SOURCE))
    assert format_report(report) == (
        "ok Id : U omega\n"
        "ok idFun : Pi (x : Level< omega) . Pi (y : U x) . y -> y\n"
        "ok idAtOne : Pi (x : U 1) . x -> x\n"
        "checked 3 definitions: 3 ok, 0 failed, 0 undecided\n"
    )
    assert report.exit_code() == 0


def test_report_flags_unexpected_acceptance_and_rejection():
    report = check_module(
        parse(
            """
            #fail
            def fine : U 1 := U 0
            def wrong : U 0 := U 0
            """
        )
    )
    text = format_report(report)
    assert "FAIL fine : unexpectedly accepted" in text
    assert "FAIL wrong :" in text
    assert report.exit_code() == 1


def test_report_expected_failure_passes():
    report = check_module(parse("#fail\ndef wrong : U 0 := U 0\n"))
    assert format_report(report) == (
        "ok wrong : fails as expected\n"
        "checked 1 definitions: 1 ok, 0 failed, 0 undecided\n"
    )
    assert report.exit_code() == 0
