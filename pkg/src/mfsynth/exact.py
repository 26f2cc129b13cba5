"""Exact comparison helpers for rationals mixed with rational powers of two.

Several verification predicates compare a rational quantity against an
irrational one of the form 2**q or x**e with rational q, e.  All such
comparisons reduce to integer comparisons after clearing denominators in
the exponent, so nothing here ever rounds.
"""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = [
    "flog2",
    "cmp_frac_pow2",
    "cmp_frac_vs_pow",
    "frac_pow2_floor",
    "is_dyadic",
    "dyadic_exponent",
]


def flog2(x: Fraction | int) -> float:
    """log2 of a positive rational, safe for values far outside float range."""
    fr = Fraction(x)
    if fr <= 0:
        raise ValueError("flog2 requires a positive value")
    num, den = fr.numerator, fr.denominator
    nb, db = num.bit_length(), den.bit_length()
    # num / 2**(nb-1) and den / 2**(db-1) both lie in [1, 2)
    return (nb - db) + math.log2(num / (1 << (nb - 1))) - math.log2(den / (1 << (db - 1)))


def cmp_frac_pow2(lhs: Fraction, q: Fraction) -> int:
    """Compare lhs with 2**q exactly.  Returns -1, 0 or 1."""
    lhs = Fraction(lhs)
    q = Fraction(q)
    if lhs <= 0:
        return -1  # 2**q is always positive
    # lhs ? 2**(p/s)  <=>  lhs**s ? 2**p   (s > 0)
    p, s = q.numerator, q.denominator
    left = lhs ** s
    if p >= 0:
        right = Fraction(1 << p)
    else:
        right = Fraction(1, 1 << (-p))
    return (left > right) - (left < right)


def cmp_frac_vs_pow(lhs: Fraction, base: Fraction, e: Fraction) -> int:
    """Compare lhs with base**e exactly for base > 0 and rational e > 0."""
    lhs = Fraction(lhs)
    base = Fraction(base)
    e = Fraction(e)
    if base <= 0:
        raise ValueError("base must be positive")
    if e <= 0:
        raise ValueError("exponent must be positive")
    if lhs <= 0:
        return -1 if base > 0 else 0
    p, s = e.numerator, e.denominator
    left = lhs ** s
    right = base ** p
    return (left > right) - (left < right)


def frac_pow2_floor(q: Fraction) -> int:
    """floor(q) for a rational exponent, used for bracket notation [J*x]."""
    q = Fraction(q)
    return q.numerator // q.denominator


def is_dyadic(x: Fraction) -> bool:
    d = Fraction(x).denominator
    return d & (d - 1) == 0


def dyadic_exponent(x: Fraction) -> int:
    """e such that x = odd/2**e; raises if x is not dyadic."""
    x = Fraction(x)
    if not is_dyadic(x):
        raise ValueError(f"{x} is not a dyadic rational")
    return x.denominator.bit_length() - 1
