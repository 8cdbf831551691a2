"""Compact double-double arithmetic (error-free transforms).

Used to re-evaluate identity-chain steps whose double-precision relative error
lands in the gray zone between honest round-off and a genuine formula
discrepancy.  Only the rational operations needed by the chain are provided.
"""

from __future__ import annotations

import math

_FMA = getattr(math, "fma", None)
_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    return s, b - (s - a)


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    if _FMA is not None:
        return p, _FMA(a, b, -p)
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


class DD:
    """Unevaluated sum hi + lo with |lo| <= ulp(hi)/2."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        self.hi = float(hi)
        self.lo = float(lo)

    @staticmethod
    def of(x) -> "DD":
        return x if isinstance(x, DD) else DD(float(x))

    def __float__(self) -> float:
        return self.hi + self.lo

    def __repr__(self) -> str:
        return f"DD({self.hi!r}, {self.lo!r})"

    def __neg__(self) -> "DD":
        return DD(-self.hi, -self.lo)

    def __abs__(self) -> "DD":
        return -self if self.hi < 0.0 or (self.hi == 0.0 and self.lo < 0.0) else self

    def __add__(self, other) -> "DD":
        other = DD.of(other)
        s, e = _two_sum(self.hi, other.hi)
        e += self.lo + other.lo
        s, e = _quick_two_sum(s, e)
        return DD(s, e)

    __radd__ = __add__

    def __sub__(self, other) -> "DD":
        return self + (-DD.of(other))

    def __rsub__(self, other) -> "DD":
        return DD.of(other) + (-self)

    def __mul__(self, other) -> "DD":
        other = DD.of(other)
        p, e = _two_prod(self.hi, other.hi)
        e += self.hi * other.lo + self.lo * other.hi
        p, e = _quick_two_sum(p, e)
        return DD(p, e)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DD":
        other = DD.of(other)
        q1 = self.hi / other.hi
        r = self - other * q1
        q2 = r.hi / other.hi
        r = r - other * q2
        q3 = r.hi / other.hi
        s, e = _quick_two_sum(q1, q2)
        return DD(s, e) + q3

    def __rtruediv__(self, other) -> "DD":
        return DD.of(other) / self

    def __pow__(self, k: int) -> "DD":
        if not isinstance(k, int) or k < 0:
            raise TypeError("DD powers are nonnegative integers only")
        out = DD(1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def _cmp_key(self) -> tuple[float, float]:
        return (self.hi, self.lo)

    def __lt__(self, other):
        o = DD.of(other)
        return self._cmp_key() < o._cmp_key()

    def __le__(self, other):
        o = DD.of(other)
        return self._cmp_key() <= o._cmp_key()

    def __gt__(self, other):
        o = DD.of(other)
        return self._cmp_key() > o._cmp_key()

    def __ge__(self, other):
        o = DD.of(other)
        return self._cmp_key() >= o._cmp_key()

    def __eq__(self, other):
        o = DD.of(other)
        return self._cmp_key() == o._cmp_key()

    def __hash__(self):
        return hash(self._cmp_key())
