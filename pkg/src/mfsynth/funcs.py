"""Monotone function representations shared by all builders.

The workhorse is :class:`PiecewiseAffineMonotone`: explicit sorted
breakpoints with exact rational values, linear interpolation in between and
clamping outside the breakpoint span.  Builders whose natural breakpoint
count exceeds what can sensibly be materialized (millions of marked cells,
astronomic staircase subdivisions) return virtual objects that share the
same evaluation interface; `to_piecewise` is the only operation guarded by
the breakpoint budget.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_BREAKPOINT_BUDGET = 10**7


class BudgetError(RuntimeError):
    """Materializing breakpoints would exceed the configured budget."""


class MonotoneFunction:
    """Interface: exact evaluation of a nondecreasing function on [0, 1]."""

    def eval_at(self, x: Fraction) -> Fraction:
        raise NotImplementedError

    def increment(self, a: Fraction, b: Fraction) -> Fraction:
        """F(b) - F(a); returns 0 for an empty interval."""
        a, b = Fraction(a), Fraction(b)
        if b <= a:
            return Fraction(0)
        return self.eval_at(b) - self.eval_at(a)

    def oscillation(self, x: Fraction, r: Fraction) -> Fraction:
        """F(x+r) - F(x-r), the symmetric oscillation over the ball B(x, r)."""
        x, r = Fraction(x), Fraction(r)
        return self.eval_at(x + r) - self.eval_at(x - r)

    def total_increment(self) -> Fraction:
        return self.increment(Fraction(0), Fraction(1))

    def breakpoint_count(self) -> int:
        raise NotImplementedError

    def to_piecewise(self, budget: int | None = DEFAULT_BREAKPOINT_BUDGET) -> "PiecewiseAffineMonotone":
        raise NotImplementedError

    def breakpoints_in(self, lo: Fraction, hi: Fraction, cap: int = 1024) -> list[Fraction]:
        """Breakpoint abscissae inside (lo, hi), at most `cap` of them."""
        return []


class PiecewiseAffineMonotone(MonotoneFunction):
    def __init__(self, xs: Sequence[Fraction], ys: Sequence[Fraction],
                 provenance: dict | None = None, validate: bool = True):
        self.xs = [Fraction(x) for x in xs]
        self.ys = [Fraction(y) for y in ys]
        self.provenance = dict(provenance or {})
        if validate:
            self._validate()

    def _validate(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise ValueError("need at least two breakpoints with matching values")
        for i in range(1, len(self.xs)):
            if self.xs[i] <= self.xs[i - 1]:
                raise ValueError(f"breakpoints not strictly increasing at index {i}")
            if self.ys[i] < self.ys[i - 1]:
                raise ValueError(f"values decrease at index {i}")

    # -- evaluation -----------------------------------------------------
    def eval_at(self, x: Fraction) -> Fraction:
        x = Fraction(x)
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return ys[0]
        if x >= xs[-1]:
            return ys[-1]
        i = bisect_right(xs, x) - 1
        x0, x1 = xs[i], xs[i + 1]
        y0, y1 = ys[i], ys[i + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def breakpoint_count(self) -> int:
        return len(self.xs)

    def to_piecewise(self, budget: int | None = DEFAULT_BREAKPOINT_BUDGET) -> "PiecewiseAffineMonotone":
        return self

    def breakpoints_in(self, lo: Fraction, hi: Fraction, cap: int = 1024) -> list[Fraction]:
        lo, hi = Fraction(lo), Fraction(hi)
        i = bisect_right(self.xs, lo)
        out = []
        while i < len(self.xs) and self.xs[i] < hi and len(out) < cap:
            out.append(self.xs[i])
            i += 1
        return out

    # -- structure queries ------------------------------------------------
    def slopes(self) -> list[Fraction]:
        return [
            (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
            for i in range(len(self.xs) - 1)
        ]

    def is_strictly_increasing(self) -> bool:
        return all(self.ys[i + 1] > self.ys[i] for i in range(len(self.ys) - 1))

    # -- exact transforms -------------------------------------------------
    def scale_y(self, c: Fraction, provenance: dict | None = None) -> "PiecewiseAffineMonotone":
        c = Fraction(c)
        if c < 0:
            raise ValueError("scale factor must be non-negative")
        return PiecewiseAffineMonotone(
            self.xs, [c * y for y in self.ys],
            provenance or self.provenance, validate=False)

    def shift_y(self, c: Fraction) -> "PiecewiseAffineMonotone":
        c = Fraction(c)
        return PiecewiseAffineMonotone(
            self.xs, [y + c for y in self.ys], self.provenance, validate=False)

    def pullback_to(self, a: Fraction, length: Fraction,
                    provenance: dict | None = None) -> "PiecewiseAffineMonotone":
        """G with G(a + length*t) = F(t): the copy of F living on [a, a+length]."""
        a, length = Fraction(a), Fraction(length)
        if length <= 0:
            raise ValueError("length must be positive")
        return PiecewiseAffineMonotone(
            [a + length * x for x in self.xs], self.ys,
            provenance or self.provenance, validate=False)

    def restrict_range(self) -> tuple[Fraction, Fraction]:
        return self.ys[0], self.ys[-1]


def add_piecewise(fs: Iterable[PiecewiseAffineMonotone],
                  provenance: dict | None = None) -> PiecewiseAffineMonotone:
    """Exact breakpoint-merged sum of piecewise affine monotone functions."""
    fs = list(fs)
    if not fs:
        raise ValueError("empty sum")
    xs = sorted({x for f in fs for x in f.xs})
    ys = []
    for x in xs:
        ys.append(sum((f.eval_at(x) for f in fs), Fraction(0)))
    return PiecewiseAffineMonotone(xs, ys, provenance, validate=False)


class MixedFunction(MonotoneFunction):
    """weight*F(x) + (1-weight)*x without materializing F."""

    def __init__(self, base: MonotoneFunction, weight: Fraction):
        weight = Fraction(weight)
        if not 0 < weight < 1:
            raise ValueError("weight must lie in (0, 1)")
        self.base = base
        self.weight = weight

    def eval_at(self, x: Fraction) -> Fraction:
        x = Fraction(x)
        xc = min(max(x, Fraction(0)), Fraction(1))
        return self.weight * self.base.eval_at(x) + (1 - self.weight) * xc

    def breakpoint_count(self) -> int:
        return self.base.breakpoint_count()

    def to_piecewise(self, budget: int | None = DEFAULT_BREAKPOINT_BUDGET) -> PiecewiseAffineMonotone:
        f = self.base.to_piecewise(budget)
        xs = sorted(set(f.xs) | {Fraction(0), Fraction(1)})
        return PiecewiseAffineMonotone(
            xs, [self.eval_at(x) for x in xs],
            {"mixed": True, "weight": str(self.weight), **f.provenance},
            validate=False)

    def breakpoints_in(self, lo: Fraction, hi: Fraction, cap: int = 1024) -> list[Fraction]:
        return self.base.breakpoints_in(lo, hi, cap)


class SumFunction(MonotoneFunction):
    """Lazy sum of monotone functions (used where terms stay virtual)."""

    def __init__(self, terms: Sequence[MonotoneFunction], provenance: dict | None = None):
        if not terms:
            raise ValueError("empty sum")
        self.terms = list(terms)
        self.provenance = dict(provenance or {})

    def eval_at(self, x: Fraction) -> Fraction:
        x = Fraction(x)
        return sum((t.eval_at(x) for t in self.terms), Fraction(0))

    def breakpoint_count(self) -> int:
        return sum(t.breakpoint_count() for t in self.terms)

    def to_piecewise(self, budget: int | None = DEFAULT_BREAKPOINT_BUDGET) -> PiecewiseAffineMonotone:
        n = self.breakpoint_count()
        if budget is not None and n > budget:
            raise BudgetError(f"sum would need ~{n} breakpoints, budget is {budget}")
        return add_piecewise([t.to_piecewise(budget) for t in self.terms], self.provenance)

    def breakpoints_in(self, lo: Fraction, hi: Fraction, cap: int = 1024) -> list[Fraction]:
        out: set[Fraction] = set()
        for t in self.terms:
            out.update(t.breakpoints_in(lo, hi, cap))
            if len(out) >= cap:
                break
        return sorted(out)[:cap]
