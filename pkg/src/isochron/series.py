"""Truncated Laurent series in one variable over complex coefficients.

A series carries its valuation, a dense coefficient block and the exclusive
truncation order: coefficients for exponents >= order are unknown.  All
arithmetic propagates truncation so residue extraction can verify that the
s^-1 coefficient is actually inside the known window.
"""

from __future__ import annotations

import numpy as np

from .errors import BranchFailure


class LaurentSeries:
    """sum_{k} c[k] s^(val+k), known exactly for exponents < order."""

    __slots__ = ("val", "coeffs", "order")

    def __init__(self, coeffs, val=0, order=None):
        c = np.asarray(coeffs, dtype=complex).ravel()
        if order is None:
            order = val + c.size
        # normalize: strip leading zeros (exact zeros only) to tighten valuation
        k = 0
        while k < c.size and c[k] == 0:
            k += 1
        if k == c.size:
            c = np.zeros(0, dtype=complex)
            val = order
        else:
            c = c[k:]
            val += k
        self.coeffs = c[: max(order - val, 0)]
        self.val = val
        self.order = order

    @classmethod
    def zero(cls, order):
        return cls([], val=order, order=order)

    @classmethod
    def monomial(cls, c, exponent, order):
        if exponent >= order:
            return cls.zero(order)
        return cls([c], val=exponent, order=order)

    def is_zero(self):
        return self.coeffs.size == 0 or not np.any(self.coeffs)

    def coeff(self, exponent):
        """Coefficient of s^exponent; raises if outside the known window."""
        if exponent >= self.order:
            raise BranchFailure(
                f"series truncated at order {self.order}, need exponent {exponent}"
            )
        k = exponent - self.val
        if k < 0 or k >= self.coeffs.size:
            return 0j
        return complex(self.coeffs[k])

    def __add__(self, other):
        order = min(self.order, other.order)
        val = min(self.val, other.val)
        n = max(order - val, 0)
        c = np.zeros(n, dtype=complex)
        for s in (self, other):
            lo = s.val - val
            m = min(s.coeffs.size, n - lo)
            if m > 0:
                c[lo : lo + m] += s.coeffs[:m]
        return LaurentSeries(c, val=val, order=order)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, z):
        return LaurentSeries(self.coeffs * z, val=self.val, order=self.order)

    def __mul__(self, other):
        if self.is_zero() or other.is_zero():
            return LaurentSeries.zero(
                min(self.order + other.val, other.order + self.val)
                if (self.coeffs.size or other.coeffs.size)
                else min(self.order, other.order)
            )
        order = min(self.order + other.val, other.order + self.val)
        val = self.val + other.val
        n = max(order - val, 0)
        c = np.convolve(self.coeffs, other.coeffs)[:n]
        return LaurentSeries(c, val=val, order=order)

    def shift(self, k):
        """Multiply by s^k."""
        return LaurentSeries(self.coeffs, val=self.val + k, order=self.order + k)

    def power(self, k: int):
        out = LaurentSeries([1.0], val=0, order=10**9)
        base = self
        kk = k
        while kk:
            if kk & 1:
                out = out * base
            base = base * base
            kk >>= 1
        return out

    def reciprocal(self):
        """1 / series; leading coefficient must be nonzero."""
        if self.coeffs.size == 0 or self.coeffs[0] == 0:
            raise BranchFailure("reciprocal of a series with zero leading term")
        n = self.order - self.val
        a = self.coeffs
        b = np.zeros(n, dtype=complex)
        b[0] = 1.0 / a[0]
        for k in range(1, n):
            acc = 0j
            top = min(k, a.size - 1)
            for i in range(1, top + 1):
                acc += a[i] * b[k - i]
            b[k] = -acc / a[0]
        return LaurentSeries(b, val=-self.val, order=self.order - 2 * self.val)

    def truncate(self, order):
        if order >= self.order:
            return self
        return LaurentSeries(self.coeffs[: max(order - self.val, 0)], val=self.val, order=order)

    def valuation(self):
        """Exponent of the first (known) nonzero coefficient; None if none known."""
        nz = np.nonzero(self.coeffs)[0]
        if nz.size == 0:
            return None
        return self.val + int(nz[0])

    def __repr__(self):
        bits = [
            f"({c:.3g})s^{self.val + k}"
            for k, c in enumerate(self.coeffs)
            if c != 0
        ]
        body = " + ".join(bits) if bits else "0"
        return f"LaurentSeries({body} + O(s^{self.order}))"


def poly_at_series(y_coeff_dicts, xs: LaurentSeries, ys: LaurentSeries, order):
    """Evaluate a bivariate polynomial at series arguments.

    ``y_coeff_dicts[j]`` maps x-exponent -> complex coefficient for y^j.
    Horner in y with precomputed x-powers keeps the work tiny.
    """
    xpow = {0: LaurentSeries([1.0], val=0, order=order)}

    def xp(i):
        if i not in xpow:
            xpow[i] = xp(i - 1) * xs
        return xpow[i]

    acc = LaurentSeries.zero(order)
    for j in range(len(y_coeff_dicts) - 1, -1, -1):
        acc = acc * ys
        row = y_coeff_dicts[j]
        for i, c in row.items():
            acc = acc + xp(i).scale(c)
    return acc
