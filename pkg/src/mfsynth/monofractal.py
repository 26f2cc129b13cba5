"""A strictly increasing function whose pointwise exponent is 1 everywhere.

The derivative is a lacunary sum of rescaled trapezoid waves, integrated in
closed form.  The amplitude sequence shrinks fast enough that the function
stays continuously differentiable, while the frequency sequence grows fast
enough that no point has a better-than-Lipschitz local approximation, which
is certified at finite scale by an explicit defect witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact import cmp_frac_vs_pow
from .funcs import PiecewiseAffineMonotone

AMPLITUDE_DIVISOR = 301  # just below the mandated 1/300 shrink per step


class MonofractalError(ValueError):
    pass


@dataclass(frozen=True)
class MonoSequences:
    a: tuple[Fraction, ...]
    b: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.a)

    def check(self) -> None:
        a, b = self.a, self.b
        if a[0] != 1 or b[0] != 4:
            raise AssertionError("sequences must start at a_1 = 1, b_1 = 4")
        for n in range(1, len(a)):
            if b[n] % 4 != 3:
                raise AssertionError(f"b_{n + 1} not congruent to 3 mod 4")
            if not a[n] < a[n - 1] / 300:
                raise AssertionError(f"a_{n + 1} >= a_{n}/300")
            # a_n > (4 b_n)^(-1/n) with n the 1-based index of the new term
            if cmp_frac_vs_pow(1 / a[n], Fraction(4 * b[n]), Fraction(1, n + 1)) >= 0:
                raise AssertionError(f"a_{n + 1} <= (4 b_{n + 1})^(-1/{n + 1})")
            if not a[n] * b[n] > 100 * sum(x * y for x, y in zip(a[:n], b[:n])):
                raise AssertionError(f"a_{n + 1} b_{n + 1} too small against earlier terms")

    def tail_bound_ok(self) -> bool:
        """a_n/100 > sum of the later amplitudes, for every n (truncated)."""
        for n in range(len(self.a) - 1):
            if not self.a[n] / 100 > sum(self.a[n + 1:], Fraction(0)):
                return False
        return True


def gen_sequences(N: int) -> MonoSequences:
    """Greedy feasible choice: a_n = a_{n-1}/301, minimal admissible b_n."""
    if N < 1:
        raise MonofractalError("depth must be >= 1")
    a = [Fraction(1)]
    b = [4]
    for n in range(2, N + 1):
        an = a[-1] / AMPLITUDE_DIVISOR
        prior = sum(x * y for x, y in zip(a, b))
        # b_n > max(100*prior/a_n, a_n^-n / 4), smallest such integer = 3 mod 4
        t1 = 100 * prior / an
        t2 = (1 / an) ** n / 4
        lo = max(t1, t2)
        cand = lo.numerator // lo.denominator + 1
        while cand % 4 != 3:
            cand += 1
        a.append(an)
        b.append(cand)
    seq = MonoSequences(tuple(a), tuple(b))
    seq.check()
    return seq


def eval_ramp(x: Fraction) -> Fraction:
    """Trapezoid wave: 0 on [0,1], up on [1,2], 1 on [2,3], down on [3,4], period 4."""
    x = Fraction(x) % 4
    if x <= 1:
        return Fraction(0)
    if x <= 2:
        return x - 1
    if x <= 3:
        return Fraction(1)
    return 4 - x


def _ramp_area(u: Fraction) -> Fraction:
    """Integral of the trapezoid wave from 0 to u >= 0, exact."""
    u = Fraction(u)
    whole = u.numerator // (4 * u.denominator)
    rest = u - 4 * whole
    acc = Fraction(2) * whole
    if rest <= 1:
        return acc
    if rest <= 2:
        return acc + (rest - 1) ** 2 / 2
    if rest <= 3:
        return acc + Fraction(1, 2) + (rest - 2)
    t = rest - 3
    return acc + Fraction(3, 2) + t - t**2 / 2


def derivative(seq: MonoSequences, x: Fraction) -> Fraction:
    x = Fraction(x)
    return sum((an * eval_ramp(bn * x) for an, bn in zip(seq.a, seq.b)), Fraction(0))


def eval_integral(seq: MonoSequences, x: Fraction) -> Fraction:
    """The function itself: integral of the wave sum from 0 to x, exact."""
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise MonofractalError("argument must lie in [0, 1]")
    return sum(
        (an / bn * _ramp_area(bn * x) for an, bn in zip(seq.a, seq.b)), Fraction(0))


def sample_to_piecewise(seq: MonoSequences, generation: int) -> PiecewiseAffineMonotone:
    """Chord approximation on the dyadic grid of the given generation."""
    if generation < 1:
        raise MonofractalError("generation must be >= 1")
    xs = [Fraction(k, 1 << generation) for k in range((1 << generation) + 1)]
    ys = [eval_integral(seq, x) for x in xs]
    return PiecewiseAffineMonotone(
        xs, ys, {"kind": "monofractal-sample", "depth": seq.depth,
                 "generation": generation, "approximation": "chord"})


@dataclass(frozen=True)
class FlatnessWitness:
    x0: Fraction
    x1: Fraction
    defect: Fraction
    bound_holds: bool
    margin_log2: float


def check_flatness_defect(seq: MonoSequences, x0: Fraction, n1: int,
                          grid_factor: int = 16) -> FlatnessWitness:
    """Search |x1 - x0| <= 4/b_{n1} for the largest linearization defect.

    Reports whether the defect beats (1/256)|x1-x0|**(1 + 1/n1), the
    finite-scale certificate that the exponent cannot exceed 1.
    """
    if not 1 <= n1 <= seq.depth:
        raise MonofractalError(f"n1 must lie in 1..{seq.depth}")
    x0 = Fraction(x0)
    if not 0 <= x0 <= 1:
        raise MonofractalError("x0 must lie in [0, 1]")
    bn = seq.b[n1 - 1]
    slope = derivative(seq, x0)
    z0 = eval_integral(seq, x0)
    step = Fraction(1, grid_factor * bn)
    best_x1: Fraction | None = None
    best_defect = Fraction(0)
    best_ok = False
    for t in range(-4 * grid_factor, 4 * grid_factor + 1):
        if t == 0:
            continue
        x1 = x0 + t * step
        if not 0 <= x1 <= 1:
            continue
        defect = abs(eval_integral(seq, x1) - z0 - slope * (x1 - x0))
        dx = abs(x1 - x0)
        # defect > (1/256)*dx^(1+1/n1)  <=>  (256*defect)^n1 > dx^(n1+1)
        ok = (256 * defect) ** n1 > dx ** (n1 + 1)
        better = (ok and not best_ok) or (ok == best_ok and defect > best_defect)
        if best_x1 is None or better:
            best_x1, best_defect, best_ok = x1, defect, ok
    if best_x1 is None:
        raise MonofractalError("empty search window")
    if best_defect > 0:
        from .exact import flog2
        dx = abs(best_x1 - x0)
        margin = flog2(256 * best_defect) - float(Fraction(n1 + 1, n1)) * flog2(dx)
    else:
        margin = float("-inf")
    return FlatnessWitness(x0, best_x1, best_defect, best_ok, margin)
