"""Measure/function duality: concatenation, Lebesgue mixing, inversion.

A monotone function F on [0, 1] with F(0) = 0 is read as the distribution
function of the measure with mass F(b) - F(a) on [a, b].  Concatenation
packs scaled copies onto the dyadic blocks [2^-p, 2^-p+1], mixing averages
against Lebesgue, and inversion swaps the roles of x and mass.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .funcs import (
    DEFAULT_BREAKPOINT_BUDGET,
    MixedFunction,
    MonotoneFunction,
    PiecewiseAffineMonotone,
)


class MeasureOpsError(ValueError):
    pass


def concatenate(functions: Sequence[MonotoneFunction],
                budget: int | None = DEFAULT_BREAKPOINT_BUDGET) -> PiecewiseAffineMonotone:
    """Pack the p-th input, scaled to mass 2**-p, onto [2**-p, 2**-p+1].

    Inputs must map [0, 1] onto [0, 1] monotonically.  The head block
    [0, 2**-P] is left flat, which makes the truncated function's exponent
    at 0 infinite without any extra time change.
    """
    if not functions:
        raise MeasureOpsError("concatenate needs at least one input")
    pieces = []
    P = len(functions)
    for p, f in enumerate(functions, start=1):
        fp = f.to_piecewise(budget)
        if fp.eval_at(Fraction(0)) != 0 or fp.eval_at(Fraction(1)) != 1:
            raise MeasureOpsError(
                f"input {p} is not a surjection of [0,1] onto [0,1] "
                f"(F(0)={fp.eval_at(Fraction(0))}, F(1)={fp.eval_at(Fraction(1))})")
        block = Fraction(1, 1 << p)
        base = block - Fraction(1, 1 << P)  # total mass of the blocks to the left
        scaled = fp.pullback_to(block, block).scale_y(block).shift_y(base)
        pieces.append(scaled)
    xs: list[Fraction] = [Fraction(0), Fraction(1, 1 << P)]
    ys: list[Fraction] = [Fraction(0), Fraction(0)]
    for scaled in reversed(pieces):
        for x, y in zip(scaled.xs, scaled.ys):
            if x > xs[-1]:
                xs.append(x)
                ys.append(y)
    return PiecewiseAffineMonotone(
        xs, ys, {"kind": "concatenation", "inputs": P})


def mix_with_lebesgue(F: MonotoneFunction, weight: Fraction,
                      materialize: bool = True,
                      budget: int | None = DEFAULT_BREAKPOINT_BUDGET):
    """weight*F + (1-weight)*id, exact.

    With `materialize=False` the result stays a lazy wrapper, which is how
    desk-scale constructions too large for explicit breakpoints get mixed.
    """
    weight = Fraction(weight)
    if not 0 < weight < 1:
        raise MeasureOpsError("weight must lie in (0, 1)")
    mixed = MixedFunction(F, weight)
    return mixed.to_piecewise(budget) if materialize else mixed


def invert_measure(F: MonotoneFunction,
                   budget: int | None = DEFAULT_BREAKPOINT_BUDGET) -> PiecewiseAffineMonotone:
    """Functional inverse of a strictly increasing piecewise affine function."""
    fp = F.to_piecewise(budget)
    if fp.ys[0] != 0:
        raise MeasureOpsError("inverse expects F(0) = 0")
    if fp.xs[0] > 0:
        raise MeasureOpsError(
            "F is flat on the initial clamp segment; inverse is not a function")
    for i, s in enumerate(fp.slopes()):
        if s == 0:
            raise MeasureOpsError(
                f"flat segment on [{fp.xs[i]}, {fp.xs[i + 1]}]: inverse is not a "
                f"function; pre-mix with Lebesgue first")
    return PiecewiseAffineMonotone(
        fp.ys, fp.xs, {"kind": "inverse", **fp.provenance})


def measure_of_interval(F: MonotoneFunction, lo: Fraction, hi: Fraction) -> Fraction:
    lo, hi = Fraction(lo), Fraction(hi)
    if not (0 <= lo and hi <= 1):
        raise MeasureOpsError("interval must lie inside [0, 1]")
    return F.increment(lo, hi)


def normalize_mass(F: MonotoneFunction,
                   budget: int | None = DEFAULT_BREAKPOINT_BUDGET) -> PiecewiseAffineMonotone:
    """Rescale values so the total increment over [0, 1] is exactly 1."""
    fp = F.to_piecewise(budget)
    mass = fp.eval_at(Fraction(1)) - fp.eval_at(Fraction(0))
    if mass <= 0:
        raise MeasureOpsError("cannot normalize a function with zero mass")
    base = fp.eval_at(Fraction(0))
    return PiecewiseAffineMonotone(
        fp.xs, [(y - base) / mass for y in fp.ys],
        {"normalized": True, **fp.provenance}, validate=False)
