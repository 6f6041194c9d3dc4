"""Generator determinism, property suites, coverage, and the canary."""

from __future__ import annotations

import pytest

from ulevels.checker import check_derivation
from ulevels.harness import (
    GenConfig,
    RULES,
    SUITES,
    broken_substitution,
    gen_case,
    gen_raw,
    gen_well_typed,
    run_suite,
    rules_in,
    shrink_term,
)
from ulevels.levels import NAT_OMEGA, domain_named
from ulevels.subst import subst1
from ulevels.terms import App, Lam, Lvl, Mty, Term, Var, term_size
import random

CFG = GenConfig(seed=11, cases=120)


# ---------------------------------------------------------------------------
# Generation


def test_generated_cases_carry_valid_derivations():
    domain = domain_named(CFG.domain_name)
    for case in gen_well_typed(CFG):
        report = check_derivation(case.derivation, domain)
        assert report.ok, report.errors
        assert case.derivation.term == case.term
        assert case.derivation.ty == case.ty
        assert case.derivation.ctx == case.ctx


def test_closed_generation_has_empty_contexts():
    for case in gen_well_typed(GenConfig(seed=3, cases=60), closed=True):
        assert case.ctx == ()


def test_generation_is_deterministic():
    a = [(c.ctx, c.term, c.ty) for c in gen_well_typed(CFG)]
    b = [(c.ctx, c.term, c.ty) for c in gen_well_typed(CFG)]
    assert a == b


def test_distinct_seeds_give_distinct_streams():
    a = [c.term for c in gen_well_typed(GenConfig(seed=1, cases=40))]
    b = [c.term for c in gen_well_typed(GenConfig(seed=2, cases=40))]
    assert a != b


def test_gen_raw_is_deterministic_and_sized():
    a = gen_raw(random.Random("s/1"), 12)
    b = gen_raw(random.Random("s/1"), 12)
    assert a == b
    assert term_size(a) >= 1


# ---------------------------------------------------------------------------
# Suites (healthy runs)


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_suite_passes_on_healthy_kernel(suite):
    report = run_suite(suite, CFG)
    assert report.ok, report.summary()
    assert report.cases == CFG.cases


def test_suite_reports_are_reproducible():
    a = run_suite("subject-reduction", CFG)
    b = run_suite("subject-reduction", CFG)
    assert a.digest == b.digest
    assert a.failures == b.failures


def test_suites_differ_by_seed():
    a = run_suite("diamond", GenConfig(seed=5, cases=50))
    b = run_suite("diamond", GenConfig(seed=6, cases=50))
    assert a.digest != b.digest


def test_unknown_suite_rejected():
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("nonsense", CFG)


def test_coverage_hits_every_rule():
    report = run_suite("coverage", GenConfig(seed=11, cases=500))
    assert report.ok, report.summary()
    fractions = dict(report.coverage)
    assert set(fractions) == set(RULES)
    for rule in RULES:
        assert fractions[rule] >= 0.01, f"{rule} below 1%"


def test_rules_in_walks_premises():
    case = gen_case(GenConfig(seed=11, cases=1), 0)
    rules = rules_in(case.derivation)
    assert case.derivation.rule in rules
    assert "Nil" in rules


# ---------------------------------------------------------------------------
# Shrinking


def test_shrink_term_minimizes_under_predicate():
    big = App(Lam(Mty(), App(Lam(Mty(), Var(0)), Var(0))), Lvl(NAT_OMEGA.zero()))

    def has_app(t: Term) -> bool:
        return isinstance(t, App)

    small = shrink_term(big, has_app)
    assert isinstance(small, App)
    assert term_size(small) <= 3


def test_shrink_keeps_term_when_nothing_smaller_fails():
    t = Lvl(NAT_OMEGA.zero())
    assert shrink_term(t, lambda s: s == t) == t


# ---------------------------------------------------------------------------
# Mutation canary

CANARY_CFG = GenConfig(seed=11, cases=500, max_size=20)


def test_broken_substitution_restores_itself():
    from ulevels import subst

    original = subst.shift
    with broken_substitution():
        assert subst.shift is not original
        assert subst1(Lam(Mty(), Var(1)), Var(0)) == Lam(Mty(), Var(0))
    assert subst.shift is original
    assert subst1(Lam(Mty(), Var(1)), Var(0)) == Lam(Mty(), Var(1))


@pytest.mark.parametrize(
    "suite", ["subject-reduction", "diamond", "progress", "canonicity"]
)
def test_canary_is_caught_by_each_dynamic_suite(suite):
    with broken_substitution():
        report = run_suite(suite, CANARY_CFG)
    assert report.failures, f"{suite} missed the broken substitution"
