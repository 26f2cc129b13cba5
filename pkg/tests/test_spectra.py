import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mfsynth.spectra import (
    AffineSpectrumParams,
    FamilySpectrum,
    SpectrumError,
    StepSpectrumPiece,
    decompose_to_affine,
    eval_spectrum,
    support_star,
    validate_family,
)


def F(a, b):
    return Fraction(a, b)


def test_validate_single_piece():
    fam = FamilySpectrum((StepSpectrumPiece(F(1, 5), F(1, 2), F(3, 20)),))
    rep = validate_family(fam)
    assert rep.ok
    assert rep.alpha0 == F(1, 5)
    assert rep.support_star == (F(1, 5), 1)


def test_validate_constant_above_h():
    fam = FamilySpectrum((StepSpectrumPiece(F(1, 5), F(1, 2), F(3, 10)),))
    rep = validate_family(fam)
    assert not rep.ok
    assert any("c <= h" in e for e in rep.errors)


def test_validate_support_touching_zero():
    fam = FamilySpectrum((StepSpectrumPiece(0, F(2, 5), 0),))
    rep = validate_family(fam)
    assert not rep.ok
    assert any("min(support) > 0" in e for e in rep.errors)


def test_eval_spectrum():
    fam = FamilySpectrum((
        StepSpectrumPiece(F(1, 5), F(1, 2), F(1, 10)),
        StepSpectrumPiece(F(3, 10), F(3, 5), F(1, 5)),
    ))
    assert eval_spectrum(fam, F(3, 10)) == F(1, 5)
    assert eval_spectrum(fam, F(1, 4)) == F(1, 10)
    assert eval_spectrum(fam, F(2, 5)) == F(1, 5)
    assert eval_spectrum(fam, F(7, 10)) == -math.inf
    with pytest.raises(SpectrumError):
        eval_spectrum(fam, F(3, 2))


def test_support_star():
    fam = FamilySpectrum((
        StepSpectrumPiece(F(3, 10), F(2, 5), F(1, 10)),
        StepSpectrumPiece(F(3, 5), F(7, 10), F(1, 10)),
    ))
    assert support_star(fam) == (F(3, 10), 1)
    point = FamilySpectrum((StepSpectrumPiece(F(9, 10), F(9, 10), F(1, 2)),))
    assert support_star(point) == (F(9, 10), 1)


def test_affine_params_admissibility():
    AffineSpectrumParams(F(2, 5), F(4, 5), F(3, 10), F(1, 2)).validate()
    with pytest.raises(SpectrumError):
        AffineSpectrumParams(F(2, 5), F(4, 5), F(1, 2), F(1, 2)).validate()


def test_decompose_first_member():
    piece = StepSpectrumPiece(F(1, 5), F(1, 2), F(3, 20))
    fams = decompose_to_affine(piece, 1)
    assert len(fams) == 1
    p = fams[0]
    assert (p.alpha0, p.beta0, p.eta) == (F(1, 5), F(1, 2), 1)
    assert p.d == F(1, 10)
    assert p.d * (1 + p.eta * p.beta0) == F(3, 20)


def test_decompose_zero_constant():
    piece = StepSpectrumPiece(F(1, 5), F(1, 2), 0)
    fams = decompose_to_affine(piece, 3)
    assert all(p.d == 0 and p.degenerate_zero for p in fams)


def test_decompose_sup_gap_shrinks():
    # sup over p of d_p(1+h/p) approaches the constant from below on [a, b]
    piece = StepSpectrumPiece(F(1, 5), F(1, 2), F(3, 20))
    fams = decompose_to_affine(piece, 10)
    c = piece.value
    h = piece.lo  # worst point: farthest from b
    vals = [p.spectrum_value(h) for p in fams]
    assert all(v <= c for v in vals)
    assert vals == sorted(vals)  # monotone nondecreasing in p at fixed h
    assert c - max(vals) < Fraction(6, 1000)
    # equality attained at h = b for every member
    assert all(p.spectrum_value(piece.hi) == c for p in fams)


@given(
    a=st.fractions(min_value=F(1, 10), max_value=F(9, 10)),
    width=st.fractions(min_value=0, max_value=F(1, 10)),
    frac=st.fractions(min_value=0, max_value=1),
    count=st.integers(min_value=1, max_value=8),
)
def test_decompose_members_admissible(a, width, frac, count):
    b = min(a + width, Fraction(99, 100))
    c = a * frac
    piece = StepSpectrumPiece(a, b, c)
    for p in decompose_to_affine(piece, count):
        assert not p.check()
        if not p.degenerate_zero:
            assert p.d * (1 + p.eta * p.beta0) <= p.beta0
            assert p.d * (1 + p.eta * p.alpha0) <= p.alpha0
