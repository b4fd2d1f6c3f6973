"""Bivariate polynomial algebra, resultants and discriminants.

Two parallel pipelines produce the discriminant ``D(h, x)`` of ``H - h``
with respect to ``y``:

* exact field: Sylvester matrix over Q(i)[x,h], fraction-free Bareiss
  elimination with exact division;
* floating field: Sylvester determinants sampled on scaled roots of unity
  in (x, h) and recovered by FFT interpolation.

The two routes are independent, which is what makes the exact/floating
agreement checks meaningful.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateResultant, ZeroPolynomial
from .field import EXACT, FLOAT, GaussianRational, as_complex, is_zero

# Relative magnitude below which a floating coefficient is considered zero.
ZERO_REL = 1e-10


# ---------------------------------------------------------------------------
# sparse bivariate polynomials
# ---------------------------------------------------------------------------

class BivarPoly:
    """Sparse polynomial in (x, y) over complex doubles or Gaussian rationals.

    Terms map exponent pairs (i, j) to nonzero coefficients.  Instances are
    immutable by convention; all operations return new polynomials.
    """

    __slots__ = ("terms", "field")

    def __init__(self, terms=None, field=FLOAT):
        self.field = field
        self.terms = {}
        if terms:
            for (i, j), c in terms.items():
                if not is_zero(c):
                    self.terms[(int(i), int(j))] = c

    # -- construction helpers ------------------------------------------------

    @classmethod
    def zero(cls, field=FLOAT):
        return cls({}, field)

    @classmethod
    def monomial(cls, c, i, j, field=FLOAT):
        return cls({(i, j): c}, field)

    def copy_with(self, terms):
        return BivarPoly(terms, self.field)

    # -- basic queries ---------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((i + j for i, j in self.terms), default=-1)

    def degree_in(self, var):
        k = 0 if var == "x" else 1
        return max((m[k] for m in self.terms), default=-1)

    def coeff(self, i, j):
        from .field import zero as fzero
        return self.terms.get((i, j), fzero(self.field))

    def homogeneous_part(self, k):
        return self.copy_with({m: c for m, c in self.terms.items() if m[0] + m[1] == k})

    def __eq__(self, other):
        return isinstance(other, BivarPoly) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "BivarPoly(0)"
        bits = [f"({c})*x^{i}*y^{j}" for (i, j), c in sorted(self.terms.items())]
        return "BivarPoly(" + " + ".join(bits) + ")"

    # -- ring operations -------------------------------------------------------

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            out[m] = c if s is None else s + c
        return self.copy_with(out)

    def __sub__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            out[m] = -c if s is None else s - c
        return self.copy_with(out)

    def __neg__(self):
        return self.copy_with({m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, BivarPoly):
            return self.scale(other)
        out = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                m = (i1 + i2, j1 + j2)
                p = c1 * c2
                s = out.get(m)
                out[m] = p if s is None else s + p
        return self.copy_with(out)

    def scale(self, c):
        return self.copy_with({m: v * c for m, v in self.terms.items()})

    # -- calculus / evaluation ---------------------------------------------------

    def partial_derivative(self, variable):
        """Exponent-shift derivative with respect to 'x' or 'y'."""
        if variable not in ("x", "y"):
            raise ValueError("variable must be 'x' or 'y'")
        out = {}
        for (i, j), c in self.terms.items():
            if variable == "x" and i > 0:
                out[(i - 1, j)] = c * i
            elif variable == "y" and j > 0:
                out[(i, j - 1)] = c * j
        return self.copy_with(out)

    def eval(self, x, y):
        """Evaluate at scalars (exact when field and arguments are exact)."""
        if self.field == EXACT and isinstance(x, GaussianRational):
            acc = GaussianRational(0)
        else:
            acc = 0j
        xp, yp = {0: _one_like(x)}, {0: _one_like(y)}
        for (i, j), c in self.terms.items():
            if i not in xp:
                xp[i] = x ** i
            if j not in yp:
                yp[j] = y ** j
            acc = acc + c * xp[i] * yp[j]
        return acc

    def eval_grid(self, x, y):
        """Vectorized evaluation on numpy arrays (floating only)."""
        acc = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for (i, j), c in self.terms.items():
            acc += as_complex(c) * x ** i * y ** j
        return acc

    def substitute_linear(self, mxx, mxy, myx, myy):
        """Compose with the linear map (x, y) <- (mxx*u + mxy*v, myx*u + myy*v)."""
        u = BivarPoly({(1, 0): _field_one(self.field)}, self.field)
        v = BivarPoly({(0, 1): _field_one(self.field)}, self.field)
        xm = u.scale(mxx) + v.scale(mxy)
        ym = u.scale(myx) + v.scale(myy)
        out = BivarPoly.zero(self.field)
        xpow = {0: BivarPoly({(0, 0): _field_one(self.field)}, self.field)}
        ypow = {0: xpow[0]}
        for (i, j), c in sorted(self.terms.items()):
            for k in range(1, i + 1):
                if k not in xpow:
                    xpow[k] = xpow[k - 1] * xm
            for k in range(1, j + 1):
                if k not in ypow:
                    ypow[k] = ypow[k - 1] * ym
            out = out + (xpow[i] * ypow[j]).scale(c)
        return out

    def to_float(self):
        if self.field == FLOAT:
            return self
        return BivarPoly({m: as_complex(c) for m, c in self.terms.items()}, FLOAT)

    def clean(self, rel=1e-13):
        """Drop floating terms below rel * max|coefficient| (rotation debris)."""
        if self.field == EXACT or not self.terms:
            return self
        scale = max(abs(c) for c in self.terms.values())
        return BivarPoly(
            {m: c for m, c in self.terms.items() if abs(c) > rel * scale}, FLOAT
        )

    def y_coefficients(self):
        """List over y-powers of the x-coefficient dicts, up to deg_y."""
        dy = self.degree_in("y")
        out = [dict() for _ in range(dy + 1)]
        for (i, j), c in self.terms.items():
            out[j][i] = c
        return out


def _one_like(x):
    return GaussianRational(1) if isinstance(x, GaussianRational) else 1.0 + 0j


def _field_one(field):
    return GaussianRational(1) if field == EXACT else 1 + 0j


# ---------------------------------------------------------------------------
# dense univariate helpers (complex, ascending coefficients)
# ---------------------------------------------------------------------------

def trim(coeffs, rel=ZERO_REL):
    """Drop trailing coefficients below rel * max|c|."""
    c = np.asarray(coeffs, dtype=complex).ravel()
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    k = c.size - 1
    while k > 0 and abs(c[k]) <= rel * scale:
        k -= 1
    return c[: k + 1].copy()


def polyval(coeffs, z):
    acc = np.zeros_like(np.asarray(z, dtype=complex))
    for c in np.asarray(coeffs, dtype=complex)[::-1]:
        acc = acc * z + c
    return acc


# ---------------------------------------------------------------------------
# the discriminant carrier D(h, x)
# ---------------------------------------------------------------------------

class UniPolyOverH:
    """Polynomial in x whose coefficients are dense polynomials in h.

    ``coeffs[k]`` is the ascending h-coefficient list of the x^k term.
    The exact field stores GaussianRational entries, the floating field
    complex scalars.
    """

    def __init__(self, coeffs, field=FLOAT):
        self.field = field
        self.coeffs = [list(c) for c in coeffs]
        self._trim_structural()

    def _trim_structural(self):
        # drop trailing identically-zero x-coefficients (exact zeros only)
        while self.coeffs and all(is_zero(c) for c in self.coeffs[-1]):
            self.coeffs.pop()

    def is_zero(self):
        return not self.coeffs

    def generic_x_degree(self):
        """Degree in x of D(h, .) for generic h."""
        if self.field == EXACT:
            deg = -1
            for k, c in enumerate(self.coeffs):
                if any(not is_zero(v) for v in c):
                    deg = k
            return deg
        scale = self._float_scale()
        deg = -1
        for k, c in enumerate(self.coeffs):
            if any(abs(v) > ZERO_REL * scale for v in c):
                deg = k
        return deg

    def _float_scale(self):
        m = 0.0
        for c in self.coeffs:
            for v in c:
                m = max(m, abs(v))
        return m or 1.0

    def x_poly_at(self, h0):
        """Dense ascending x-coefficients of D(h0, x); exact in the exact field."""
        out = []
        for c in self.coeffs:
            acc = GaussianRational(0) if self.field == EXACT else 0j
            for v in reversed(c):
                acc = acc * h0 + v
            out.append(acc)
        return out

    def x_degree_at(self, h0):
        vals = self.x_poly_at(h0)
        if self.field == EXACT:
            deg = -1
            for k, v in enumerate(vals):
                if not is_zero(v):
                    deg = k
            return deg
        mags = [abs(v) for v in vals]
        scale = max(mags) if mags else 0.0
        if scale == 0.0:
            return -1
        deg = -1
        for k, m in enumerate(mags):
            if m > ZERO_REL * scale:
                deg = k
        return deg

    def leading_h_poly(self):
        """Ascending h-coefficients of the generic leading x-coefficient."""
        d = self.generic_x_degree()
        if d < 0:
            return []
        return list(self.coeffs[d])

    def eval(self, h, x):
        acc = GaussianRational(0) if self.field == EXACT else 0j
        for v in reversed(self.x_poly_at(h)):
            acc = acc * x + v
        return acc

    def to_float(self):
        if self.field == FLOAT:
            return self
        return UniPolyOverH(
            [[as_complex(v) for v in c] for c in self.coeffs], FLOAT
        )


def degree_drop_at(d: UniPolyOverH, h0) -> int:
    """Drop of the x-degree of D(h, x) at h = h0 versus generic h."""
    if d.is_zero():
        raise ZeroPolynomial("degree drop of the zero polynomial")
    return d.generic_x_degree() - d.x_degree_at(h0)


# ---------------------------------------------------------------------------
# exact pipeline: sparse (x, h) polynomials and Bareiss elimination
# ---------------------------------------------------------------------------

class _XH:
    """Sparse exact polynomial in (x, h) over GaussianRational."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for m, c in terms.items():
                if c:
                    self.terms[m] = c

    @classmethod
    def const(cls, c):
        return cls({(0, 0): c} if c else {})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            v = c if s is None else s + c
            if v:
                out[m] = v
            elif s is not None:
                del out[m]
        return _XH(out)

    def __sub__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            v = -c if s is None else s - c
            if v:
                out[m] = v
            elif s is not None:
                del out[m]
        return _XH(out)

    def __neg__(self):
        return _XH({m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        out = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                m = (i1 + i2, j1 + j2)
                p = c1 * c2
                s = out.get(m)
                v = p if s is None else s + p
                if v:
                    out[m] = v
                elif s is not None:
                    del out[m]
        return _XH(out)

    def _leading(self):
        m = max(self.terms)  # lex on (x-exp, h-exp)
        return m, self.terms[m]

    def exact_div(self, divisor: "_XH") -> "_XH":
        """Exact division; raises if the division leaves a remainder."""
        if divisor.is_zero():
            raise ZeroDivisionError("exact division by zero polynomial")
        rem = _XH(dict(self.terms))
        quot = {}
        dm, dc = divisor._leading()
        while not rem.is_zero():
            m, c = rem._leading()
            e = (m[0] - dm[0], m[1] - dm[1])
            if e[0] < 0 or e[1] < 0:
                raise ArithmeticError("inexact polynomial division in Bareiss step")
            q = c / dc
            quot[e] = quot.get(e, GaussianRational(0)) + q
            rem = rem - _XH({e: q}) * divisor
        return _XH({m: c for m, c in quot.items() if c})


def _bareiss_det(mat):
    """Fraction-free determinant of a matrix of _XH entries."""
    n = len(mat)
    a = [row[:] for row in mat]
    sign = 1
    prev = _XH.const(GaussianRational(1))
    for k in range(n - 1):
        if a[k][k].is_zero():
            piv = next((i for i in range(k + 1, n) if not a[i][k].is_zero()), None)
            if piv is None:
                return _XH()
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = num if k == 0 else num.exact_div(prev)
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return _XH({m: -c for m, c in det.terms.items()}) if sign < 0 else det


def _exact_sylvester(p_rows, q_rows, dp, dq):
    """Sylvester matrix rows for y-polys with _XH coefficients (descending)."""
    n = dp + dq
    zero = _XH()
    mat = []
    for r in range(dq):
        row = [zero] * n
        for j, c in enumerate(p_rows):
            row[r + j] = c
        mat.append(row)
    for r in range(dp):
        row = [zero] * n
        for j, c in enumerate(q_rows):
            row[r + j] = c
        mat.append(row)
    return mat


def _y_coeffs_xh(p: BivarPoly, shift_by_h: bool):
    """Descending-in-y list of _XH coefficients of p (minus h if requested)."""
    dy = p.degree_in("y")
    cols = [dict() for _ in range(dy + 1)]
    for (i, j), c in p.terms.items():
        cols[j][(i, 0)] = c
    if shift_by_h:
        c00 = cols[0].get((0, 0), GaussianRational(0))
        cols[0][(0, 0)] = c00  # keep entry
        cols[0][(0, 1)] = cols[0].get((0, 1), GaussianRational(0)) - GaussianRational(1)
    return [_XH(cols[j]) for j in range(dy, -1, -1)]


# ---------------------------------------------------------------------------
# floating pipeline: evaluation + FFT interpolation
# ---------------------------------------------------------------------------

def _sylvester_det_numeric(pc, qc):
    """Determinant of the Sylvester matrix of two descending coeff lists."""
    dp, dq = len(pc) - 1, len(qc) - 1
    n = dp + dq
    if n == 0:
        return 1.0 + 0j
    s = np.zeros((n, n), dtype=complex)
    for r in range(dq):
        s[r, r : r + dp + 1] = pc
    for r in range(dp):
        s[dq + r, r : r + dq + 1] = qc
    return complex(np.linalg.det(s))


def _fft_coeffs(values, radius):
    """Recover ascending coefficients from samples on a scaled root circle."""
    m = len(values)
    c = np.fft.fft(np.asarray(values, dtype=complex)) / m
    return c / radius ** np.arange(m)


def _float_resultant(p: BivarPoly, q: BivarPoly, shift_by_h: bool,
                     divide_by=None):
    """Res_y(p - h?, q) over C[h][x] by sampling + interpolation.

    divide_by: optional callable (x, h) -> complex dividing each determinant
    sample before interpolation (used for the discriminant's leading
    coefficient).
    """
    p = p.to_float()
    q = q.to_float()
    dyp, dyq = p.degree_in("y"), q.degree_in("y")
    dxp, dxq = max(p.degree_in("x"), 0), max(q.degree_in("x"), 0)
    deg_x = dyq * dxp + dyp * dxq + 2
    deg_h = (dyq if shift_by_h else 0) + 1
    mx, mh = deg_x + 1, deg_h + 1
    rx, rh = 1.3, 1.1
    pc_y = p.y_coefficients()
    qc_y = q.y_coefficients()

    def coeff_at(cols, x):
        return [sum(c * x ** i for i, c in col.items()) for col in cols]

    h_samples = rh * np.exp(2j * np.pi * np.arange(mh) / mh)
    x_samples = rx * np.exp(2j * np.pi * np.arange(mx) / mx)
    table = np.zeros((mh, mx), dtype=complex)
    for a, h in enumerate(h_samples):
        for b, x in enumerate(x_samples):
            pc = coeff_at(pc_y, x)
            if shift_by_h:
                pc[0] = pc[0] - h
            qc = coeff_at(qc_y, x)
            det = _sylvester_det_numeric(pc[::-1], qc[::-1])
            if divide_by is not None:
                det /= divide_by(x, h)
            table[a, b] = det
    # interpolate in x per h-sample, then in h per x-coefficient
    cx = np.vstack([_fft_coeffs(table[a], rx) for a in range(mh)])
    coeffs = []
    for k in range(mx):
        ch = _fft_coeffs(cx[:, k], rh)
        coeffs.append(list(ch))
    # global trim of negligible entries
    scale = max(max(abs(v) for v in c) for c in coeffs)
    scale = scale or 1.0
    cleaned = []
    for c in coeffs:
        c = [v if abs(v) > ZERO_REL * scale else 0j for v in c]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        cleaned.append(c)
    while cleaned and all(v == 0 for v in cleaned[-1]):
        cleaned.pop()
    return UniPolyOverH(cleaned, FLOAT)


# ---------------------------------------------------------------------------
# public resultant / discriminant interface
# ---------------------------------------------------------------------------

def resultant_in_y(p: BivarPoly, q: BivarPoly, shift_p_by_h=False) -> UniPolyOverH:
    """Resultant of p (optionally p - h) and q with respect to y.

    Exact field uses fraction-free Bareiss elimination of the Sylvester
    matrix; floating field uses pivoted numeric elimination on sample grids.
    """
    if p.is_zero() or q.is_zero():
        raise DegenerateResultant("resultant with the zero polynomial")
    if p.degree_in("y") < 1 and q.degree_in("y") < 1:
        raise DegenerateResultant("at least one argument needs positive degree in y")
    if p.field == EXACT and q.field == EXACT:
        prows = _y_coeffs_xh(p, shift_p_by_h)
        qrows = _y_coeffs_xh(q, False)
        mat = _exact_sylvester(prows, qrows, p.degree_in("y"), q.degree_in("y"))
        det = _bareiss_det(mat)
        return _xh_to_unipoly(det)
    return _float_resultant(p, q, shift_p_by_h)


def discriminant_in_y(p: BivarPoly, shift_by_h=True) -> UniPolyOverH:
    """Discriminant of p (minus h by default) with respect to y.

    Standard normalization: (-1)^(d(d-1)/2) Res_y(p, p_y) / lc_y(p), where
    the leading y-coefficient is unaffected by the h shift.
    """
    d = p.degree_in("y")
    if d < 2:
        raise DegenerateResultant("discriminant needs degree >= 2 in y")
    py = p.partial_derivative("y")
    sign = -1 if (d * (d - 1) // 2) % 2 else 1
    # leading y-coefficient of p as a polynomial in x
    lead = {i: c for (i, j), c in p.terms.items() if j == d}
    if p.field == EXACT:
        res = resultant_in_y(p, py, shift_p_by_h=shift_by_h)
        lc = _XH({(i, 0): c for i, c in lead.items()})
        det = _xh_from_unipoly(res)
        out = det.exact_div(lc)
        if sign < 0:
            out = -out
        return _xh_to_unipoly(out)

    def lc_value(x, h):
        return sum(as_complex(c) * x ** i for i, c in lead.items())

    out = _float_resultant(p, py, shift_by_h, divide_by=lc_value)
    if sign < 0:
        out = UniPolyOverH([[-v for v in c] for c in out.coeffs], FLOAT)
    return out


def _xh_to_unipoly(det: _XH) -> UniPolyOverH:
    if det.is_zero():
        return UniPolyOverH([], EXACT)
    dx = max(m[0] for m in det.terms)
    dh = max(m[1] for m in det.terms)
    coeffs = [[GaussianRational(0)] * (dh + 1) for _ in range(dx + 1)]
    for (i, j), c in det.terms.items():
        coeffs[i][j] = c
    return UniPolyOverH(coeffs, EXACT)


def _xh_from_unipoly(u: UniPolyOverH) -> _XH:
    terms = {}
    for i, c in enumerate(u.coeffs):
        for j, v in enumerate(c):
            if not is_zero(v):
                terms[(i, j)] = v
    return _XH(terms)
