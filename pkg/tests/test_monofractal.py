from fractions import Fraction

import pytest

from mfsynth import monofractal as mf


def F(a, b=1):
    return Fraction(a, b)


def test_sequences_start():
    s = mf.gen_sequences(1)
    assert s.a == (1,) and s.b == (4,)


def test_sequences_level2_minimal():
    s = mf.gen_sequences(2)
    assert s.a[1] == F(1, 301)
    assert s.b[1] == 120403
    # re-check the two defining inequalities directly
    assert s.a[1] * s.b[1] / 100 > 4
    assert 4 * s.b[1] > 301**2


def test_sequences_invariants_depth4():
    s = mf.gen_sequences(4)
    s.check()
    assert s.tail_bound_ok()


def test_ramp_values():
    assert mf.eval_ramp(F(1, 2)) == 0
    assert mf.eval_ramp(F(5, 2)) == 1
    assert mf.eval_ramp(F(3, 2)) == F(1, 2)
    assert mf.eval_ramp(F(7, 2)) == F(1, 2)
    assert mf.eval_ramp(F(9, 2)) == 0  # periodic


def test_ramp_area_oracle():
    # integral over one period: 0 + 1/2 + 1 + 1/2
    assert mf._ramp_area(4) == 2
    assert mf._ramp_area(F(3, 2)) == F(1, 8)
    assert mf._ramp_area(F(5, 2)) == F(1)


def test_integral_depth1_total():
    s = mf.gen_sequences(1)
    assert mf.eval_integral(s, F(1)) == F(1, 2)
    assert mf.eval_integral(s, F(0)) == 0


def test_integral_monotone_on_grid():
    s = mf.gen_sequences(3)
    vals = [mf.eval_integral(s, F(k, 1 << 12)) for k in range(0, 1 << 12, 8)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_integral_matches_quadrature():
    # independent oracle: midpoint rule on the exact derivative
    s = mf.gen_sequences(2)
    x = F(3, 7)
    n = 200000
    acc = Fraction(0)
    h = x / n
    for i in range(n):
        acc += mf.derivative(s, h * i + h / 2)
    approx = acc * h
    exact = mf.eval_integral(s, x)
    assert abs(float(approx - exact)) < 5e-4


def test_flatness_witness_at_zero():
    s = mf.gen_sequences(3)
    w = mf.check_flatness_defect(s, F(0), 1)
    assert w.bound_holds
    assert abs(w.x1 - w.x0) <= Fraction(4, s.b[0])


def test_flatness_witness_on_plateau():
    # x0 inside the flat part of the slowest wave still succeeds via the
    # faster terms at deeper n1
    s = mf.gen_sequences(3)
    w = mf.check_flatness_defect(s, F(1, 8), 2)
    assert w.bound_holds
    assert abs(w.x1 - w.x0) <= Fraction(4, s.b[1])


def test_flatness_precondition():
    s = mf.gen_sequences(2)
    with pytest.raises(mf.MonofractalError):
        mf.check_flatness_defect(s, F(1, 2), 3)


def test_sample_differentiable_breaks():
    # chord sample of a C^1 function: adjacent chord slopes nearly agree
    s = mf.gen_sequences(2)
    pw = mf.sample_to_piecewise(s, 10)
    slopes = pw.slopes()
    worst = max(abs(float(b - a)) for a, b in zip(slopes, slopes[1:]))
    # derivative is continuous with modulus sum(a_n * b_n * 2^-10)
    bound = 2 * float(sum(a * b for a, b in zip(s.a, s.b))) / 1024
    assert worst <= bound
