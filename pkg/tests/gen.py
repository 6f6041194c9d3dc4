"""Hypothesis strategies shared across the test modules."""

from __future__ import annotations

from hypothesis import strategies as st

from ulevels.levels import Finite, OmegaPlus
from ulevels.subst import Subst
from ulevels.terms import (
    Absurd,
    App,
    Lam,
    LevelLt,
    Lvl,
    Mty,
    Pi,
    Term,
    Univ,
    Var,
)

level_values = st.one_of(
    st.integers(min_value=0, max_value=9).map(Finite),
    st.integers(min_value=0, max_value=4).map(OmegaPlus),
)

finite_levels = st.integers(min_value=0, max_value=9).map(Finite)


@st.composite
def terms(draw, free: int = 0, budget: int = 6) -> Term:
    """Well-scoped terms with at most ``free`` free variables."""
    leaves = [st.just(Mty()), level_values.map(Lvl)]
    if free > 0:
        leaves.append(st.integers(0, free - 1).map(Var))
    if budget <= 1 or draw(st.integers(0, 3)) == 0:
        return draw(st.one_of(leaves))
    shape = draw(st.sampled_from(["pi", "lam", "app", "absurd", "univ", "lt"]))
    half = budget // 2
    if shape == "pi":
        return Pi(draw(terms(free, half)), draw(terms(free + 1, half)))
    if shape == "lam":
        return Lam(draw(terms(free, half)), draw(terms(free + 1, half)))
    if shape == "app":
        return App(draw(terms(free, half)), draw(terms(free, half)))
    if shape == "absurd":
        return Absurd(draw(terms(free, half)), draw(terms(free, half)))
    if shape == "univ":
        return Univ(draw(terms(free, budget - 1)))
    return LevelLt(draw(terms(free, budget - 1)))


def subst_image_scope(free: int) -> int:
    """Free-variable budget for images produced by ``substs(free)``."""
    return free + 4


@st.composite
def substs(draw, free: int) -> Subst:
    """Substitutions covering ``free`` indices; images are scoped by
    ``subst_image_scope(free)`` (tail renamings stay in that range)."""
    k = draw(st.integers(0, free))
    image_free = subst_image_scope(free)
    prefix = tuple(draw(terms(image_free, 4)) for _ in range(k))
    tail = draw(st.integers(0, 3))
    assert tail + free - k <= image_free
    return Subst(prefix, tail)
