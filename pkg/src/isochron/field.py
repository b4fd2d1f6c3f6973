"""Exact Gaussian-rational arithmetic and the two-field coefficient convention.

Every polynomial in the package carries a field tag, either ``FLOAT``
(complex doubles) or ``EXACT`` (Gaussian rationals).  Exact arithmetic is
what makes degree-drop computations trustworthy; floating arithmetic is used
everywhere speed matters.
"""

from __future__ import annotations

from fractions import Fraction

FLOAT = "float"
EXACT = "exact"


class GaussianRational:
    """Complex number with exact rational real and imaginary parts.

    Arithmetic never rounds, equality is decidable.  Construction accepts
    ints, Fractions and rational strings like ``"3/7"``.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if k < 0:
            return GaussianRational(1) / self ** (-k)
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    @classmethod
    def parse(cls, re, im=0) -> "GaussianRational":
        """Build from int/str/Fraction parts, e.g. parse("1/3", "-2")."""
        return cls(Fraction(re), Fraction(im))


def _coerce(value):
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    return NotImplemented


def zero(field: str):
    return GaussianRational(0) if field == EXACT else 0j


def one(field: str):
    return GaussianRational(1) if field == EXACT else 1 + 0j


def is_zero(value) -> bool:
    """Structural zero test: exact for GaussianRational, literal for floats."""
    if isinstance(value, GaussianRational):
        return not value
    return value == 0


def as_complex(value) -> complex:
    return value.to_complex() if isinstance(value, GaussianRational) else complex(value)
