"""Target spectra: suprema of constant step pieces, and their affine pieces.

A family spectrum is a finite ordered list of constant pieces c on closed
supports [a, b] inside (0, 1] with c <= a; its value at h is the supremum
over covering pieces (or -inf).  Each step piece decomposes into a schedule
of affine pieces d_p*(1 + h/p) on [a, b] whose pointwise supremum recovers
the constant, every member satisfying the admissibility inequalities of the
affine builder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

NEG_INF = -math.inf


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class StepSpectrumPiece:
    lo: Fraction
    hi: Fraction
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        object.__setattr__(self, "value", Fraction(self.value))

    def check(self, index: int | None = None) -> list[str]:
        tag = f"piece {index}" if index is not None else "piece"
        errs = []
        if not self.lo <= self.hi:
            errs.append(f"{tag}: empty support [{self.lo}, {self.hi}]")
        if self.lo <= 0:
            errs.append(f"{tag}: min(support) > 0 violated (support starts at {self.lo})")
        if self.hi > 1:
            errs.append(f"{tag}: support must lie inside (0, 1]")
        if not 0 <= self.value <= 1:
            errs.append(f"{tag}: value {self.value} outside [0, 1]")
        if self.value > self.lo:
            errs.append(
                f"{tag}: value {self.value} exceeds h on [{self.lo}, "
                f"{min(self.value, self.hi)}) (constant must satisfy c <= h on its support)")
        return errs

    def covers(self, h: Fraction) -> bool:
        return self.lo <= h <= self.hi


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    errors: tuple[str, ...]
    alpha0: Fraction | None
    support_star: tuple[Fraction, Fraction] | None


@dataclass(frozen=True)
class FamilySpectrum:
    pieces: tuple[StepSpectrumPiece, ...]

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))

    @property
    def alpha0(self) -> Fraction:
        return min(p.lo for p in self.pieces)

    def eval_at(self, h: Fraction) -> float | Fraction:
        h = Fraction(h)
        vals = [p.value for p in self.pieces if p.covers(h)]
        return max(vals) if vals else NEG_INF


def validate_family(f: FamilySpectrum) -> ValidationReport:
    if not f.pieces:
        return ValidationReport(False, ("no pieces",), None, None)
    errors: list[str] = []
    for i, p in enumerate(f.pieces):
        errors.extend(p.check(i))
    ok = not errors
    return ValidationReport(
        ok,
        tuple(errors),
        f.alpha0 if ok else None,
        support_star(f) if ok else None,
    )


def eval_spectrum(f: FamilySpectrum, h: Fraction) -> float | Fraction:
    h = Fraction(h)
    if not 0 <= h <= 1:
        raise SpectrumError("h must lie in [0, 1]")
    return f.eval_at(h)


def support_star(f: FamilySpectrum) -> tuple[Fraction, Fraction]:
    """Smallest interval of the form [h, 1] containing every piece support."""
    return (min(p.lo for p in f.pieces), Fraction(1))


@dataclass(frozen=True)
class AffineSpectrumParams:
    """Parameters of an affine spectrum d*(1 + eta*h) supported on [alpha0, beta0]."""

    alpha0: Fraction
    beta0: Fraction
    d: Fraction
    eta: Fraction
    degenerate_zero: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("alpha0", "beta0", "d", "eta"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    def check(self) -> list[str]:
        errs = []
        if not 0 < self.alpha0 <= self.beta0 < 1:
            errs.append(f"need 0 < alpha0 <= beta0 < 1, got ({self.alpha0}, {self.beta0})")
        if self.degenerate_zero:
            if self.d != 0:
                errs.append("degenerate params must have d = 0")
            return errs
        if not 0 < self.d < self.alpha0:
            errs.append(f"need 0 < d < alpha0, got d = {self.d}")
        if self.eta <= 0:
            errs.append(f"need eta > 0, got {self.eta}")
        if self.d * (1 + self.eta * self.beta0) > self.beta0:
            errs.append("admissibility d*(1+eta*beta0) <= beta0 violated")
        if self.d * (1 + self.eta * self.alpha0) > self.alpha0:
            errs.append("admissibility d*(1+eta*alpha0) <= alpha0 violated")
        return errs

    def validate(self) -> "AffineSpectrumParams":
        errs = self.check()
        if errs:
            raise SpectrumError("; ".join(errs))
        return self

    def spectrum_value(self, h: Fraction) -> Fraction | float:
        h = Fraction(h)
        if not self.alpha0 <= h <= self.beta0:
            return NEG_INF
        return self.d * (1 + self.eta * h)


def decompose_to_affine(piece: StepSpectrumPiece, count: int) -> list[AffineSpectrumParams]:
    """Affine schedule eta_p = 1/p, d_p = c/(1 + eta_p*b) for p = 1..count.

    sup_p d_p*(1 + eta_p*h) equals c at h = b for every p and increases to c
    everywhere on [a, b] as p grows.
    """
    errs = piece.check()
    if errs:
        raise SpectrumError("; ".join(errs))
    if count < 1:
        raise SpectrumError("count must be >= 1")
    a, b, c = piece.lo, piece.hi, piece.value
    out = []
    for p in range(1, count + 1):
        eta = Fraction(1, p)
        if c == 0:
            out.append(AffineSpectrumParams(a, b, Fraction(0), eta, degenerate_zero=True))
            continue
        d = c / (1 + eta * b)
        out.append(AffineSpectrumParams(a, b, d, eta).validate())
    return out
