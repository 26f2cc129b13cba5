from fractions import Fraction

import numpy as np
import pytest

from mfsynth import affine
from mfsynth.funcs import BudgetError
from mfsynth.spectra import AffineSpectrumParams


def F(a, b=1):
    return Fraction(a, b)


PARAMS = AffineSpectrumParams(F(2, 5), F(4, 5), F(3, 10), F(1, 2))


@pytest.fixture(scope="module")
def small_plan():
    return affine.plan_levels(PARAMS, 2, "desk", [8, 16])


@pytest.fixture(scope="module")
def small_sets(small_plan):
    s1 = affine.build_index_sets(small_plan, 1)
    s2 = affine.build_index_sets(small_plan, 2, s1)
    return s1, s2


def test_plan_grid_and_gamma():
    plan = affine.plan_levels(PARAMS, 2, "desk", [20, 60])
    lv1, lv2 = plan.levels
    assert lv1.alphas_requested == (F(2, 5), F(3, 5), F(4, 5))
    assert lv2.alphas_requested == (F(2, 5), F(8, 15), F(2, 3), F(4, 5))
    # gamma formula on the requested midpoint: 0.3 * 1.3 * 0.9 = 0.351
    g = PARAMS.d * (1 + PARAMS.eta * F(3, 5)) * (1 - F(1, 10))
    assert g == F(351, 1000)
    # snapped alphas make J/alpha integral and stay inside (alpha0, beta0)
    for lv in plan.levels:
        for i in lv.stretch_indices:
            assert lv.J % 1 == 0
            assert Fraction(lv.J, lv.stretch_exp[i]) == lv.alphas[i]
            assert PARAMS.alpha0 < lv.alphas[i] < PARAMS.beta0
        assert all(a < b for a, b in zip(lv.alphas, lv.alphas[1:]))
        assert all(g < a for g, a in zip(lv.gammas, lv.alphas))


def test_plan_rejects_bad_params():
    with pytest.raises(Exception):
        affine.plan_levels(
            AffineSpectrumParams(F(2, 5), F(4, 5), F(1, 2), F(1, 2)), 1, "desk", [10])


def test_faithful_level1_minimal():
    plan = affine.plan_levels(PARAMS, 1, "faithful")
    lv = plan.levels[0]
    assert not lv.faithful_failures
    # the congruence bracket must clear 2^100, so J1 is in the 170+ range
    assert lv.J >= 150
    q = lv.J * lv.gammas[1] / lv.alphas[1]
    assert q.numerator // q.denominator >= 100


def test_faithful_level2_infeasible():
    with pytest.raises(affine.InfeasibleError) as ei:
        affine.plan_levels(PARAMS, 2, "faithful")
    assert "J_2" in str(ei.value)


def test_desk_needs_overrides():
    with pytest.raises(affine.InfeasibleError):
        affine.plan_levels(PARAMS, 2, "desk")
    with pytest.raises(affine.InfeasibleError):
        affine.plan_levels(PARAMS, 2, "desk", [20, 20])


def test_level1_index_set_is_progression(small_plan):
    s1 = affine.build_index_sets(small_plan, 1)
    lv = small_plan.level(1)
    step = 1 << lv.spacing_exp[1]
    arr = s1.ks[1]
    assert arr[0] == step
    assert np.all(np.diff(arr) == step)
    assert arr[-1] <= (1 << lv.J) - 1
    rep = s1.sandwich[1]
    assert rep["lower_ok"] and rep["upper_ok"] and rep["far_upper_ok"]


def test_level2_nesting_and_disjointness(small_plan, small_sets):
    s1, s2 = small_sets
    lv1, lv2 = small_plan.levels
    dj = lv2.J - lv1.J
    parents = set(s1.ks[1].tolist())
    for i, arr in s2.ks.items():
        for k in arr.tolist():
            K = k >> dj
            assert K in parents
            # left endpoint inside the parent's marked stretched interval
            left = Fraction(K + 1, 1 << lv1.J) - Fraction(1, 1 << lv1.stretch_exp[1])
            assert Fraction(k, 1 << lv2.J) >= left
            assert Fraction(k + 1, 1 << lv2.J) <= Fraction(K + 1, 1 << lv1.J)
    ids = sorted(s2.ks)
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            assert not set(s2.ks[ids[a]].tolist()) & set(s2.ks[ids[b]].tolist())


def test_level_function_values(small_plan, small_sets):
    s1, _ = small_sets
    z1 = affine.build_level_function(small_plan, 1, s1)
    lv = small_plan.level(1)
    # off marked cells the function is x/2
    assert z1.eval_at(F(1, 1 << lv.J)) == F(1, 2 << lv.J)
    assert z1.eval_at(0) == 0
    assert z1.eval_at(1) == F(1, 2)
    # inside a marked cell: constant then steep
    k = int(s1.ks[1][0])
    m = lv.stretch_exp[1]
    right = Fraction(k + 1, 1 << lv.J)
    a = right - Fraction(1, 1 << m)
    mid_flat = Fraction(k, 1 << lv.J) + (a - Fraction(k, 1 << lv.J)) / 2
    assert z1.eval_at(mid_flat) == F(k, 2 << lv.J)
    osc = z1.eval_at(right) - z1.eval_at(a)
    assert osc == Fraction(1, 2 << lv.J)


def test_oscillation_and_disjointness_reports(small_plan, small_sets):
    s1, s2 = small_sets
    z1 = affine.build_level_function(small_plan, 1, s1)
    z2 = affine.build_level_function(small_plan, 2, s2)
    r1 = affine.oscillation_identity_report(z1)
    assert r1["sample_checked"] == r1["marks"]
    affine.oscillation_identity_report(z2)
    d1 = affine.pairwise_disjoint_report(z1)
    assert d1["disjoint"] and d1["method"].startswith("all-pairs")
    affine.pairwise_disjoint_report(z2)


def test_assemble_totals_and_tail(small_plan, small_sets):
    s1, s2 = small_sets
    z1 = affine.build_level_function(small_plan, 1, s1)
    z2 = affine.build_level_function(small_plan, 2, s2)
    Z = affine.assemble(small_plan, [z1, z2])
    assert Z.eval_at(1) == F(3, 4)
    assert affine.assemble(small_plan, [z1]).eval_at(1) == F(1, 2)
    # adding level 2 changes no value by more than the uniform tail bound
    Z1only = affine.assemble(small_plan, [z1])
    grid = [Fraction(t, 256) for t in range(257)]
    worst = max(abs(Z.eval_at(x) - Z1only.eval_at(x)) for x in grid)
    assert worst <= Z.tail_bound(1)


def test_assembled_monotone_continuous(small_plan, small_sets):
    s1, s2 = small_sets
    z1 = affine.build_level_function(small_plan, 1, s1)
    z2 = affine.build_level_function(small_plan, 2, s2)
    Z = affine.assemble(small_plan, [z1, z2]).to_piecewise()
    assert all(y2 >= y1 for y1, y2 in zip(Z.ys, Z.ys[1:]))
    # continuity is structural for breakpoint functions; check strictness off 0/1
    assert Z.is_strictly_increasing()


def test_budget_guard(small_plan, small_sets):
    s1, _ = small_sets
    z1 = affine.build_level_function(small_plan, 1, s1)
    with pytest.raises(BudgetError):
        z1.to_piecewise(budget=3)


def test_cover_report(small_plan, small_sets):
    s1, s2 = small_sets
    rep = affine.cantor_cover_report(small_plan, {1: s1, 2: s2})
    assert rep["levels"][2]["nested"]
    assert rep["levels"][1]["intervals"] == len(s1.ks[1])


def test_flat_background_constant_off_cover(small_plan, small_sets):
    s1, _ = small_sets
    z1 = affine.build_level_function(small_plan, 1, s1, background="flat")
    lv = small_plan.level(1)
    # between two marked cells the flat variant does not increase
    k = int(s1.ks[1][0])
    x1 = Fraction(k + 1, 1 << lv.J)
    x2 = Fraction(int(s1.ks[1][1]), 1 << lv.J)
    assert z1.eval_at(x2) == z1.eval_at(x1)
    assert z1.eval_at(1) == Fraction(len(s1.ks[1]), 1 << (lv.J + 1))
    # but the rise across a marked stretch is unchanged
    m = lv.stretch_exp[1]
    right = Fraction(k + 1, 1 << lv.J)
    assert z1.eval_at(right) - z1.eval_at(right - Fraction(1, 1 << m)) == Fraction(1, 2 << lv.J)


def test_degenerate_branch_plan():
    params = AffineSpectrumParams(F(1, 2), F(1, 2), F(3, 10), F(1, 3))
    plan = affine.plan_levels(params, 1, "desk", [12])
    assert plan.degenerate
    lv = plan.level(1)
    assert lv.stretch_indices == (1,)
    assert params.alpha0 < lv.alphas[1] <= plan.alpha0_prime
    s1 = affine.build_index_sets(plan, 1)
    z1 = affine.build_level_function(plan, 1, s1)
    affine.oscillation_identity_report(z1)
