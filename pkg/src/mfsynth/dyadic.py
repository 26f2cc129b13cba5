"""Exact dyadic rationals, dyadic intervals and their stretched right-subintervals.

Everything downstream (level functions, covers, oscillation identities) is
built on cells I(j, k) = [k/2**j, (k+1)/2**j) and on the closed subinterval
of length 2**(-j/alpha) that ends at the right endpoint of a cell.  The
stretch parameter alpha is restricted to rationals with j/alpha integral so
every endpoint stays a dyadic rational and all identities can be asserted
with integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering


class DyadicError(ValueError):
    pass


@total_ordering
class DyadicRational:
    """num / 2**exp in canonical form (num odd or zero; exp >= 0)."""

    __slots__ = ("num", "exp")

    def __init__(self, num: int, exp: int = 0):
        if exp < 0:
            num <<= -exp
            exp = 0
        if num == 0:
            exp = 0
        else:
            while exp > 0 and num % 2 == 0:
                num //= 2
                exp -= 1
        self.num = num
        self.exp = exp

    # -- constructors -------------------------------------------------
    @classmethod
    def from_fraction(cls, fr: Fraction) -> "DyadicRational":
        fr = Fraction(fr)
        d = fr.denominator
        if d & (d - 1):
            raise DyadicError(f"{fr} is not dyadic")
        return cls(fr.numerator, d.bit_length() - 1)

    # -- conversions --------------------------------------------------
    @property
    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __float__(self) -> float:
        return self.num / (1 << self.exp)

    def __str__(self) -> str:
        return f"{self.num}/2^{self.exp}"

    __repr__ = __str__

    @classmethod
    def parse(cls, s: str) -> "DyadicRational":
        num, _, rest = s.partition("/2^")
        if not rest:
            raise DyadicError(f"cannot parse dyadic rational {s!r}")
        return cls(int(num), int(rest))

    # -- arithmetic (always exact) -------------------------------------
    def _align(self, other: "DyadicRational") -> tuple[int, int, int]:
        e = max(self.exp, other.exp)
        return self.num << (e - self.exp), other.num << (e - other.exp), e

    def __add__(self, other):
        if not isinstance(other, DyadicRational):
            return NotImplemented
        a, b, e = self._align(other)
        return DyadicRational(a + b, e)

    def __sub__(self, other):
        if not isinstance(other, DyadicRational):
            return NotImplemented
        a, b, e = self._align(other)
        return DyadicRational(a - b, e)

    def __neg__(self):
        return DyadicRational(-self.num, self.exp)

    def __mul__(self, other):
        if isinstance(other, int):
            return DyadicRational(self.num * other, self.exp)
        if isinstance(other, DyadicRational):
            return DyadicRational(self.num * other.num, self.exp + other.exp)
        return NotImplemented

    __rmul__ = __mul__

    def shifted(self, k: int) -> "DyadicRational":
        """self * 2**k."""
        return DyadicRational(self.num, self.exp - k)

    # -- order ----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, DyadicRational):
            return self.num == other.num and self.exp == other.exp
        if isinstance(other, (int, Fraction)):
            return self.as_fraction == other
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, DyadicRational):
            a, b, _ = self._align(other)
            return a < b
        if isinstance(other, (int, Fraction)):
            return self.as_fraction < other
        return NotImplemented

    def __hash__(self):
        return hash(self.as_fraction)


ZERO = DyadicRational(0)
ONE = DyadicRational(1)


@dataclass(frozen=True)
class DyadicInterval:
    """Half-open cell [k/2**j, (k+1)/2**j) of generation j."""

    j: int
    k: int

    def __post_init__(self):
        if self.j < 0:
            raise DyadicError("generation must be non-negative")
        if not 0 <= self.k < (1 << self.j):
            raise DyadicError(f"index k={self.k} out of range for generation {self.j}")

    @property
    def left(self) -> DyadicRational:
        return DyadicRational(self.k, self.j)

    @property
    def right(self) -> DyadicRational:
        return DyadicRational(self.k + 1, self.j)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.j)

    def contains(self, x) -> bool:
        fx = x.as_fraction if isinstance(x, DyadicRational) else Fraction(x)
        return self.left.as_fraction <= fx < self.right.as_fraction


@dataclass(frozen=True)
class StretchedInterval:
    """Closed right-subinterval of a cell with exact length 2**(-m), m = j/alpha."""

    parent: DyadicInterval
    alpha: Fraction
    m: int  # = parent.j / alpha, guaranteed integral

    @property
    def right(self) -> DyadicRational:
        return self.parent.right

    @property
    def left(self) -> DyadicRational:
        return self.right - DyadicRational(1, self.m)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.m)

    def contains(self, x) -> bool:
        fx = x.as_fraction if isinstance(x, DyadicRational) else Fraction(x)
        return self.left.as_fraction <= fx <= self.right.as_fraction


def interval(j: int, k: int) -> DyadicInterval:
    return DyadicInterval(j, k)


def stretch_exponent(j: int, alpha: Fraction) -> int:
    """j/alpha as an integer; raises when the quotient is not integral."""
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise DyadicError(f"stretch parameter {alpha} must lie in (0, 1]")
    q = Fraction(j, 1) / alpha
    if q.denominator != 1:
        raise DyadicError(
            f"j/alpha = {q} is not an integer; choose the generation as a "
            f"multiple compatible with alpha = {alpha}"
        )
    return q.numerator


def stretched_interval(j: int, k: int, alpha: Fraction) -> StretchedInterval:
    parent = DyadicInterval(j, k)
    m = stretch_exponent(j, alpha)
    return StretchedInterval(parent, Fraction(alpha), m)
