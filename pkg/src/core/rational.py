"""
Exact rational helpers.

Certified bounds for rational powers with non-integer exponents, and the
bit-width helpers used by the compression codecs.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

from src.config import ROOT_PRECISION_BITS


Number = Union[int, Fraction]


def ceil_log2(n: int) -> int:
    """Bits needed to index n items (0 when n <= 1)."""
    if n < 1:
        raise ValueError(f"ceil_log2 needs a positive count, got {n}")
    return (n - 1).bit_length()


def integer_root(value: int, k: int) -> int:
    """Largest integer r with r**k <= value."""
    if value < 0 or k < 1:
        raise ValueError(f"integer_root needs value >= 0 and k >= 1, got {value}, {k}")
    if value < 2 or k == 1:
        return value
    r = 1 << ((value.bit_length() + k - 1) // k)
    while True:
        nxt = ((k - 1) * r + value // r ** (k - 1)) // k
        if nxt >= r:
            break
        r = nxt
    while r ** k > value:
        r -= 1
    while (r + 1) ** k <= value:
        r += 1
    return r


@dataclass(frozen=True)
class LossInterval:
    """Certified enclosure lo <= true value <= hi, both exact rationals."""
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"Empty interval [{self.lo}, {self.hi}]")

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def __str__(self) -> str:
        return str(self.lo) if self.exact else f"[{self.lo},{self.hi}]"


def certified_root(value: Number, k: int, bits: int = ROOT_PRECISION_BITS) -> Tuple[Fraction, Fraction]:
    """
    Bracket value**(1/k) between two rationals at most 2**-bits apart.

    The bounds coincide when the root is an exact dyadic rational.
    """
    value = Fraction(value)
    if value < 0:
        raise ValueError(f"Cannot take a root of negative {value}")
    scale = 1 << bits
    scaled = value.numerator * scale ** k // value.denominator
    r = integer_root(scaled, k)
    lo = Fraction(r, scale)
    if lo ** k == value:
        return lo, lo
    return lo, Fraction(r + 1, scale)


def certified_power(value: Number, exponent: Fraction, bits: int = ROOT_PRECISION_BITS) -> LossInterval:
    """Certified enclosure of value**exponent for value in [0, 1] and rational exponent >= 1."""
    value, exponent = Fraction(value), Fraction(exponent)
    if exponent.denominator == 1:
        exact = value ** exponent.numerator
        return LossInterval(exact, exact)
    base = value ** exponent.numerator
    lo, hi = certified_root(base, exponent.denominator, bits)
    return LossInterval(lo, hi)


def exact_root(value: Number, k: int) -> Optional[Fraction]:
    """value**(1/k) when it is rational, else None."""
    value = Fraction(value)
    if value < 0:
        raise ValueError(f"Cannot take a root of negative {value}")
    numerator = integer_root(value.numerator, k)
    denominator = integer_root(value.denominator, k)
    if numerator ** k == value.numerator and denominator ** k == value.denominator:
        return Fraction(numerator, denominator)
    return None
