from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mfsynth import measure_ops as mo
from mfsynth.funcs import PiecewiseAffineMonotone


def F(a, b=1):
    return Fraction(a, b)


def identity():
    return PiecewiseAffineMonotone([F(0), F(1)], [F(0), F(1)])


def staircase():
    return PiecewiseAffineMonotone(
        [F(0), F(1, 4), F(1, 2), F(1)],
        [F(0), F(1, 8), F(3, 4), F(1)])


def test_concat_single_identity():
    f = mo.concatenate([identity()])
    assert f.eval_at(F(3, 4)) == F(1, 4)
    assert f.eval_at(F(1, 2)) == 0
    assert f.eval_at(F(1, 4)) == 0
    assert f.eval_at(F(1)) == F(1, 2)


def test_concat_two_identities():
    f = mo.concatenate([identity(), identity()])
    assert f.eval_at(F(1)) == F(3, 4)
    assert f.eval_at(F(1, 4)) == 0
    assert f.eval_at(F(1, 2)) == F(1, 4)


def test_concat_junction_continuity():
    f = mo.concatenate([staircase(), identity(), staircase()])
    for p in (1, 2, 3):
        x = F(1, 1 << p)
        eps = F(1, 1 << 40)
        left = f.eval_at(x - eps)
        right = f.eval_at(x + eps)
        at = f.eval_at(x)
        assert abs(left - at) < F(1, 1 << 30)
        assert abs(right - at) < F(1, 1 << 30)
    # total mass over the blocks
    assert f.eval_at(F(1)) == F(1, 2) + F(1, 4) + F(1, 8)


def test_concat_rejects_non_surjective():
    bad = PiecewiseAffineMonotone([F(0), F(1)], [F(0), F(1, 2)])
    with pytest.raises(mo.MeasureOpsError):
        mo.concatenate([bad])
    with pytest.raises(mo.MeasureOpsError):
        mo.concatenate([])


def test_mix_identity_fixed_point():
    f = mo.mix_with_lebesgue(identity(), F(1, 3))
    for x in (F(0), F(1, 3), F(2, 3), F(1)):
        assert f.eval_at(x) == x


def test_mix_flat_function():
    flat = PiecewiseAffineMonotone([F(0), F(1)], [F(0), F(0)])
    f = mo.mix_with_lebesgue(flat, F(1, 2))
    assert f.eval_at(F(1, 2)) == F(1, 4)
    assert f.eval_at(F(1)) == F(1, 2)


def test_mix_slope_floor():
    f = mo.mix_with_lebesgue(staircase(), F(1, 2))
    assert all(s >= F(1, 2) for s in f.slopes())
    with pytest.raises(mo.MeasureOpsError):
        mo.mix_with_lebesgue(staircase(), F(3, 2))


def test_invert_identity_and_half():
    assert mo.invert_measure(identity()).eval_at(F(1, 3)) == F(1, 3)
    half = PiecewiseAffineMonotone([F(0), F(1)], [F(0), F(1, 2)])
    inv = mo.invert_measure(half)
    assert inv.eval_at(F(1, 4)) == F(1, 2)
    assert inv.eval_at(F(1, 2)) == F(1)


def test_invert_involution():
    f = staircase()
    back = mo.invert_measure(mo.invert_measure(f))
    assert back.xs == f.xs and back.ys == f.ys


def test_invert_rejects_flat():
    flat = PiecewiseAffineMonotone(
        [F(0), F(1, 2), F(3, 4), F(1)], [F(0), F(1, 2), F(1, 2), F(1)])
    with pytest.raises(mo.MeasureOpsError):
        mo.invert_measure(flat)


def test_measure_of_interval():
    assert mo.measure_of_interval(identity(), F(1, 4), F(1, 2)) == F(1, 4)
    assert mo.measure_of_interval(identity(), F(1, 2), F(1, 2)) == 0
    with pytest.raises(mo.MeasureOpsError):
        mo.measure_of_interval(identity(), F(-1, 4), F(1, 2))


@given(st.lists(st.fractions(min_value=0, max_value=1), min_size=2, max_size=8))
def test_measure_additivity(points):
    f = staircase()
    pts = sorted(set(points))
    if len(pts) < 2:
        return
    total = mo.measure_of_interval(f, pts[0], pts[-1])
    parts = sum(
        (mo.measure_of_interval(f, a, b) for a, b in zip(pts, pts[1:])),
        Fraction(0))
    assert parts == total


def test_normalize_mass():
    f = mo.normalize_mass(staircase().scale_y(F(1, 3)))
    assert f.eval_at(F(1)) == 1
    assert f.eval_at(F(0)) == 0
