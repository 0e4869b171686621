"""Signed reals stored as (sign, log|x|)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

# Relative error of the represented value after one add/mul/div, valid while
# |log x| stays below LOG_RANGE_FOR_BOUND (beyond that the float spacing of the
# log itself, ~|log x| * 2.2e-16, dominates).
REL_ERROR_PER_OP = 1e-12
LOG_RANGE_FOR_BOUND = 2000.0


@dataclass(frozen=True)
class LogReal:
    sign: int  # -1, 0 or +1
    log: float  # natural log of |value|; -inf when sign == 0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")
        if self.sign == 0:
            object.__setattr__(self, "log", -math.inf)
        elif math.isnan(self.log) or self.log == -math.inf:
            raise ValueError("nonzero LogReal needs a finite log magnitude")

    @classmethod
    def zero(cls) -> LogReal:
        return cls(0, -math.inf)

    @classmethod
    def from_log(cls, log: float) -> LogReal:
        return cls.zero() if log == -math.inf else cls(1, float(log))

    @classmethod
    def of(cls, x) -> LogReal:
        """From an int (any size, exact magnitude), a float or a Fraction."""
        if isinstance(x, LogReal):
            return x
        if x == 0:
            return cls.zero()
        sign = 1 if x > 0 else -1
        if isinstance(x, int):
            return cls(sign, math.log(abs(x)))
        if hasattr(x, "numerator"):
            return cls(sign, math.log(abs(x.numerator)) - math.log(x.denominator))
        return cls(sign, math.log(abs(float(x))))

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log)

    def __mul__(self, other) -> LogReal:
        other = LogReal.of(other)
        if self.sign == 0 or other.sign == 0:
            return LogReal.zero()
        return LogReal(self.sign * other.sign, self.log + other.log)

    __rmul__ = __mul__

    def __truediv__(self, other) -> LogReal:
        other = LogReal.of(other)
        if other.sign == 0:
            raise ZeroDivisionError("LogReal division by zero")
        if self.sign == 0:
            return self
        return LogReal(self.sign * other.sign, self.log - other.log)

    def __rtruediv__(self, other) -> LogReal:
        return LogReal.of(other) / self

    def __neg__(self) -> LogReal:
        return LogReal(-self.sign, self.log)

    def __add__(self, other) -> LogReal:
        other = LogReal.of(other)
        if other.sign == 0:
            return self
        if self.sign == 0:
            return other
        hi, lo = (self, other) if self.log >= other.log else (other, self)
        d = lo.log - hi.log
        if hi.sign == lo.sign:
            return LogReal(hi.sign, hi.log + math.log1p(math.exp(d)))
        if d == 0.0:
            return LogReal.zero()
        return LogReal(hi.sign, hi.log + math.log1p(-math.exp(d)))

    __radd__ = __add__

    def __sub__(self, other) -> LogReal:
        return self + (-LogReal.of(other))

    def __rsub__(self, other) -> LogReal:
        return LogReal.of(other) - self

    def __pow__(self, k: float) -> LogReal:
        if self.sign < 0:
            raise ValueError("power of a negative LogReal")
        if self.sign == 0:
            return LogReal.zero() if k > 0 else LogReal(1, 0.0)
        return LogReal(1, self.log * k)

    def __lt__(self, other):
        other = LogReal.of(other)
        if self.sign != other.sign:
            return self.sign < other.sign
        if self.sign == 0:
            return False
        return self.log < other.log if self.sign > 0 else self.log > other.log

    def __le__(self, other):
        return self == LogReal.of(other) or self < other

    def __gt__(self, other):
        return LogReal.of(other) < self

    def __ge__(self, other):
        return LogReal.of(other) <= self

    def __eq__(self, other):
        try:
            other = LogReal.of(other)
        except TypeError:
            return NotImplemented
        return self.sign == other.sign and (self.sign == 0 or self.log == other.log)

    def __hash__(self):
        return hash((self.sign, self.log))

    def log10(self) -> float:
        return self.log / math.log(10)

    def __repr__(self):
        if self.sign == 0:
            return "LogReal(0)"
        return f"LogReal({'-' if self.sign < 0 else ''}exp({self.log!r}))"


def logsumexp(terms: Iterable[LogReal]) -> LogReal:
    """Sum of non-negative LogReals with a single max shift."""
    terms = list(terms)
    logs = [t.log for t in terms if t.sign != 0]
    if any(t.sign < 0 for t in terms):
        raise ValueError("logsumexp expects non-negative terms")
    if not logs:
        return LogReal.zero()
    top = max(logs)
    return LogReal(1, top + math.log(math.fsum(math.exp(x - top) for x in logs)))
