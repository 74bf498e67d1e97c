"""Exact Gaussian rationals ``re + i*im`` with ``re, im`` in Q."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

_ZERO = mpq(0)
_ONE = mpq(1)


def _q(v) -> mpq:
    if isinstance(v, type(_ZERO)):
        return v
    if isinstance(v, (int, Rational)):
        return mpq(v.numerator, v.denominator) if isinstance(v, Fraction) else mpq(v)
    if isinstance(v, str):
        return mpq(Fraction(v))
    raise TypeError(f"cannot make an exact rational from {v!r}")


class Scalar:
    """Immutable element of Q(i).

    Parts are stored as gmpy2 ``mpq``: always reduced, denominator positive.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _q(re))
        object.__setattr__(self, "im", _q(im))

    @classmethod
    def _raw(cls, re, im):
        s = object.__new__(cls)
        object.__setattr__(s, "re", re)
        object.__setattr__(s, "im", im)
        return s

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    # -- predicates -------------------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    @property
    def is_real(self):
        return not self.im

    def is_one(self):
        return self.re == 1 and not self.im

    # -- arithmetic -------------------------------------------------------
    def __add__(self, o):
        if not isinstance(o, Scalar):
            o = _coerce(o)
            if o is None:
                return NotImplemented
        return Scalar._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        if not isinstance(o, Scalar):
            o = _coerce(o)
            if o is None:
                return NotImplemented
        return Scalar._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else o - self

    def __neg__(self):
        return Scalar._raw(-self.re, -self.im)

    def __mul__(self, o):
        if not isinstance(o, Scalar):
            o = _coerce(o)
            if o is None:
                return NotImplemented
        a, b, c, d = self.re, self.im, o.re, o.im
        if not b:
            if not d:
                return Scalar._raw(a * c, _ZERO)
            return Scalar._raw(a * c, a * d)
        if not d:
            return Scalar._raw(a * c, b * c)
        return Scalar._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self):
        a, b = self.re, self.im
        if not b:
            if not a:
                raise ZeroDivisionError("inverse of Scalar 0")
            return Scalar._raw(1 / a, _ZERO)
        n = a * a + b * b
        return Scalar._raw(a / n, -b / n)

    def __truediv__(self, o):
        if not isinstance(o, Scalar):
            o = _coerce(o)
            if o is None:
                return NotImplemented
        if not o.im:
            if not o.re:
                raise ZeroDivisionError("division by Scalar 0")
            return Scalar._raw(self.re / o.re, self.im / o.re)
        return self * o.inverse()

    def __rtruediv__(self, o):
        o = _coerce(o)
        return NotImplemented if o is None else o / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("Scalar powers must be integers")
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self):
        return Scalar._raw(self.re, -self.im)

    # -- comparison / hashing --------------------------------------------
    def __eq__(self, o):
        if isinstance(o, Scalar):
            return self.re == o.re and self.im == o.im
        if isinstance(o, (int, Rational)):
            return not self.im and self.re == o
        if isinstance(o, complex):
            return complex(self) == o
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(Fraction(int(self.re.numerator), int(self.re.denominator)))
        return hash((int(self.re.numerator), int(self.re.denominator),
                     int(self.im.numerator), int(self.im.denominator)))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def sort_key(self):
        return (self.re, self.im)

    @property
    def real(self) -> Fraction:
        return Fraction(int(self.re.numerator), int(self.re.denominator))

    @property
    def imag(self) -> Fraction:
        return Fraction(int(self.im.numerator), int(self.im.denominator))

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        def fmt(q):
            return str(int(q.numerator)) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

        if not self.im:
            return fmt(self.re)
        if not self.re:
            return f"{fmt(self.im)}*I"
        sign = "+" if self.im > 0 else "-"
        return f"({fmt(self.re)} {sign} {fmt(abs(self.im))}*I)"


ZERO = Scalar._raw(_ZERO, _ZERO)
ONE = Scalar._raw(_ONE, _ZERO)
I = Scalar._raw(_ZERO, _ONE)


def _coerce(v):
    if isinstance(v, (int, Fraction, mpq)):
        return Scalar(v)
    if isinstance(v, (float, complex)):
        return as_scalar(v)
    return None


def as_scalar(v) -> Scalar:
    if isinstance(v, Scalar):
        return v
    if isinstance(v, complex):
        raise TypeError("floating complex values are not exact; build Scalar from rationals")
    if isinstance(v, float):
        raise TypeError("floats are not exact; use Fraction or a string")
    return Scalar(v)
