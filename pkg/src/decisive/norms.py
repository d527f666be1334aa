"""Exact norm values.

A norm is stored as ``coef * log2(base)``.  Logarithmic norms of split
creatures are ``r * log2(x)``; rational norms of tabular creatures are
``t * log2(2)``.  Every comparison reduces to an inequality between products
of integer powers, so no floating point is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded, SchemaError
from .extnat import bit_budget


@dataclass(frozen=True)
class NormValue:
    coef: Fraction
    base: int
    log: bool = True

    def __post_init__(self):
        if self.base < 1:
            raise SchemaError("norm base must be at least 1")

    # -- constructors
    @classmethod
    def exact_log(cls, x: int, r) -> "NormValue":
        """r * log2(x)."""
        return cls(Fraction(r), int(x), True)

    @classmethod
    def rational(cls, q) -> "NormValue":
        return cls(Fraction(q), 2, False)

    # -- views
    @property
    def x(self) -> int:
        return self.base

    def __float__(self) -> float:
        return float(self.coef) * math.log2(self.base)

    def is_zero(self) -> bool:
        return self.coef == 0 or self.base == 1

    # -- comparisons
    def ge(self, other: "NormValue", shift=0) -> bool:
        """self >= other + shift, decided exactly."""
        return _sign(self, other, Fraction(shift)) >= 0

    def gt(self, other: "NormValue", shift=0) -> bool:
        return _sign(self, other, Fraction(shift)) > 0

    def gt_const(self, t) -> bool:
        return self.gt(ZERO, t)

    def ge_const(self, t) -> bool:
        return self.ge(ZERO, t)

    def __lt__(self, other):
        return other.gt(self)

    def __le__(self, other):
        return other.ge(self)

    def __gt__(self, other):
        return self.gt(other)

    def __ge__(self, other):
        return self.ge(other)

    def same(self, other: "NormValue") -> bool:
        return _sign(self, other, Fraction(0)) == 0

    def to_json(self):
        if self.log:
            return {"log2": self.base, "coef": str(self.coef)}
        return str(self.coef)

    @classmethod
    def from_json(cls, data) -> "NormValue":
        if isinstance(data, dict):
            return cls.exact_log(int(data["log2"]), Fraction(data["coef"]))
        return cls.rational(Fraction(str(data)))

    def __str__(self):
        if self.log and self.base & (self.base - 1) == 0:
            return str(self.coef * (self.base.bit_length() - 1))
        if self.log:
            return f"{self.coef}*log2({self.base})"
        return str(self.coef)


ZERO = NormValue.rational(0)


def _pow_factors(factors: list[tuple[int, int]]) -> int:
    """Product of base**exp for non-negative exps, guarded by the bit budget."""
    bits = sum(max(b.bit_length() - 1, 0) * e for b, e in factors)
    if bits > bit_budget():
        raise BudgetExceeded(f"norm comparison needs about {bits} bits")
    out = 1
    for b, e in factors:
        out *= b**e
    return out


def _sign(a: NormValue, b: NormValue, s: Fraction) -> int:
    """Sign of a - b - s."""
    if a.base & (a.base - 1) == 0 and b.base & (b.base - 1) == 0:
        # both logarithms are integers
        d = a.coef * (a.base.bit_length() - 1) - b.coef * (b.base.bit_length() - 1) - s
        return (d > 0) - (d < 0)
    # a.coef*log a.base - b.coef*log b.base - s*log 2, all times D
    D = math.lcm(a.coef.denominator, b.coef.denominator, s.denominator)
    terms = [
        (a.base, int(a.coef * D)),
        (b.base, -int(b.coef * D)),
        (2, -int(s * D)),
    ]
    lhs = [(base, e) for base, e in terms if e > 0 and base > 1]
    rhs = [(base, -e) for base, e in terms if e < 0 and base > 1]
    L, R = _pow_factors(lhs), _pow_factors(rhs)
    return (L > R) - (L < R)
