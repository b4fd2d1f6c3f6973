"""Projective behavior at the line at infinity.

Infinite points and multiplicities of the closure of {H = h}, Newton
polygons of the chart polynomials, truncated Puiseux branches, residues of
the period form dx/H_y on those branches, and the two lambda indices (exact
degree drop and per-point ramification tracking).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BranchFailure,
    CharacteristicDegenerate,
    EmptyCarrier,
    LinearSystem,
    TrackingLost,
)
from .field import EXACT, as_complex, is_zero
from .hamiltonian import HomogeneousHamiltonianSystem
from .poly import BivarPoly, discriminant_in_y, degree_drop_at, trim
from .roots import univariate_roots
from .series import LaurentSeries, poly_at_series

DEFAULT_TRUNCATION_FACTOR = 2  # K = 2 (n + 1)
TRACK_ESCAPE_RADIUS = 1e5
TRACK_ANGLE = 0.3
TRACK_ANGLE_RETRY = 1.1


# ---------------------------------------------------------------------------
# infinite points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InfinitePoint:
    """Point [beta : alpha : 0] of the projective closure, normalized."""

    beta: complex
    alpha: complex
    multiplicity: int

    @property
    def is_px(self):
        return self.alpha == 0

    @property
    def is_py(self):
        return self.beta == 0

    def label(self):
        if self.is_px:
            return "Px"
        if self.is_py:
            return "Py"
        return f"[{self.beta:.6g}:{self.alpha:.6g}:0]"


def points_at_infinity(sys: HomogeneousHamiltonianSystem):
    """Zeros of H_{n+1} on the line at infinity with factor multiplicities.

    P_x = [1:0:0] appears iff y | H_{n+1} (multiplicity = y-adic valuation),
    P_y = [0:1:0] iff x | H_{n+1}; the remaining points come from roots of
    H_{n+1}(1, t).  Multiplicities sum to n + 1.
    """
    n = sys.n
    a = [as_complex(c) for c in sys.a]
    if all(c == 0 for c in a):
        raise LinearSystem("H_{n+1} is identically zero")
    nonzero = [j for j, c in enumerate(a) if c != 0]
    n1 = min(nonzero)  # y-adic valuation
    top = max(nonzero)
    out = []
    if n1 > 0:
        out.append(InfinitePoint(beta=1.0 + 0j, alpha=0j, multiplicity=n1))
    # roots of sum_{j=n1..top} a_j t^(j-n1), t = y/x direction
    tpoly = np.array(a[n1 : top + 1], dtype=complex)
    if len(tpoly) > 1:
        for t0, mult in univariate_roots(tpoly):
            beta, alpha = (1.0 + 0j, t0) if abs(t0) <= 1 else (1.0 / t0, 1.0 + 0j)
            out.append(InfinitePoint(beta=beta, alpha=alpha, multiplicity=mult))
    if top < n + 1:
        out.append(InfinitePoint(beta=0j, alpha=1.0 + 0j, multiplicity=n + 1 - top))
    assert sum(p.multiplicity for p in out) == n + 1
    return out


# ---------------------------------------------------------------------------
# Newton polygon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolygonSegment:
    start: tuple  # (k, l), lattice point with the larger l
    end: tuple
    slope: Fraction


@dataclass(frozen=True)
class NewtonPolygon:
    segments: tuple


def newton_polygon(f: BivarPoly) -> NewtonPolygon:
    """Lower-left convex hull of the carrier, axes excluded.

    Segments are ordered by increasing k with strictly increasing negative
    slopes, from the lowest point on the l-axis side to the carrier point
    closest to the k-axis.
    """
    carrier = sorted(f.terms.keys())
    if not carrier:
        raise EmptyCarrier("zero polynomial has no Newton polygon")
    if (0, 0) in f.terms and not is_zero(f.terms[(0, 0)]):
        raise EmptyCarrier("polygon requires F(0,0) = 0")
    # minimal l per k
    best = {}
    for k, l in carrier:
        if k not in best or l < best[k]:
            best[k] = l
    pts = sorted(best.items())  # (k, lmin)
    hull = []
    for k, l in pts:
        while len(hull) >= 2:
            (k1, l1), (k2, l2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies above the segment hull[-2] -> (k,l)
            if (l2 - l1) * (k - k1) >= (l - l1) * (k2 - k1):
                hull.pop()
            else:
                break
        hull.append((k, l))
    segments = []
    for (k1, l1), (k2, l2) in zip(hull[:-1], hull[1:]):
        slope = Fraction(l2 - l1, k2 - k1)
        if slope < 0:
            segments.append(PolygonSegment((k1, l1), (k2, l2), slope))
    return NewtonPolygon(tuple(segments))


# ---------------------------------------------------------------------------
# Puiseux branches
# ---------------------------------------------------------------------------

@dataclass
class PuiseuxBranch:
    """One place of the curve at the chart origin.

    X = s^p, Y = series (valuation q, leading coefficient d0).  ``chart``
    records which chart the branch lives in: "Px", "Py" (swapped system) or
    a rotated chart with its (alpha, beta) data.
    """

    x_exponent: int  # p
    y_valuation: int  # q
    y_series: LaurentSeries
    segment: PolygonSegment
    chart: str = "Px"
    rotation: tuple | None = None  # (alpha, beta) for rotated charts

    @property
    def leading_coefficient(self):
        return self.y_series.coeff(self.y_valuation)

    def residual_order(self, f: BivarPoly):
        """Valuation of F(s^p, Y(s)); None when no nonzero term is known."""
        order = self.y_series.order
        xs = LaurentSeries.monomial(1.0, self.x_exponent, order * 2 + 64)
        val = _poly_on_branch(f, xs, self.y_series, order).valuation()
        return val


def _poly_on_branch(f: BivarPoly, xs: LaurentSeries, ys: LaurentSeries, order):
    cols = f.y_coefficients()
    dicts = [{i: as_complex(c) for i, c in col.items()} for col in cols]
    return poly_at_series(dicts, xs, ys, order + 1)


def puiseux_branches(f: BivarPoly, truncation: int) -> list[PuiseuxBranch]:
    """Truncated Puiseux parameterizations of every branch at the origin.

    One branch per place: conjugate parameterizations (s -> unit-root * s)
    are not repeated.  Simple characteristic roots lift by series Newton;
    multiple roots recurse on the shifted polynomial.
    """
    f = f.to_float()
    polygon = newton_polygon(f)
    out = []
    for seg in polygon.segments:
        out.extend(_segment_branches(f, seg, truncation))
    return out


def _segment_branches(f: BivarPoly, seg: PolygonSegment, truncation: int):
    p = -seg.slope.numerator  # slope = -p/q in lowest terms
    q = seg.slope.denominator
    (k1, l1), (k2, l2) = seg.start, seg.end
    m0 = p * k1 + q * l1
    # characteristic polynomial: sum of b_{kl} d^((l - l2)/p) over segment points
    char = {}
    for (k, l), c in f.terms.items():
        if p * k + q * l == m0 and l >= l2:
            e = (l - l2) // p if p > 0 else 0
            if (l - l2) % p == 0:
                char[e] = char.get(e, 0j) + as_complex(c)
    deg = max(char)
    psi = np.zeros(deg + 1, dtype=complex)
    for e, c in char.items():
        psi[e] = c
    if psi[-1] == 0 or psi[0] == 0:
        raise CharacteristicDegenerate(
            "characteristic polynomial degenerate after normalization"
        )
    branches = []
    for w0, mult in univariate_roots(psi):
        d0 = w0 ** (1.0 / p) if p > 1 else w0
        if mult == 1:
            ys = _lift_simple(f, p, q, d0, truncation)
            branches.append(
                PuiseuxBranch(x_exponent=p, y_valuation=q, y_series=ys, segment=seg)
            )
        else:
            branches.extend(_lift_multiple(f, seg, p, q, d0, mult, truncation))
    return branches


def _series_newton(g_dicts, t0, order):
    """Solve G(s, t(s)) = 0 for a series t with t(0) = t0 (simple root)."""
    t = LaurentSeries([t0], val=0, order=order)
    gp_dicts = [
        {i: c * (j) for i, c in g_dicts[j].items()} for j in range(1, len(g_dicts))
    ]
    sx = LaurentSeries.monomial(1.0, 1, order + 8)
    steps = max(3, math.ceil(math.log2(order + 2)) + 1)
    for _ in range(steps):
        gval = poly_at_series(g_dicts, sx, t, order)
        gder = poly_at_series(gp_dicts, sx, t, order)
        if gval.is_zero():
            break
        t = t - gval * gder.reciprocal()
        t = t.truncate(order)
    return t


def _lift_simple(f: BivarPoly, p, q, d0, truncation):
    """Newton lift of a simple characteristic root to a series in s."""
    order = truncation + 1
    # G(s, t) = F(s^p, s^q t) / s^m0 as polynomial in t with series coefficients
    m0 = min(p * k + q * l for (k, l) in f.terms)
    dy = f.degree_in("y")
    g_dicts = [dict() for _ in range(dy + 1)]
    for (k, l), c in f.terms.items():
        e = p * k + q * l - m0
        g_dicts[l][e] = g_dicts[l].get(e, 0j) + as_complex(c)
    # here the "x" exponent of poly_at_series is the s-power directly
    t = _series_newton(g_dicts, d0, order)
    ys = t.shift(q).truncate(truncation + q + 1)
    return ys


def _lift_multiple(f: BivarPoly, seg, p, q, d0, mult, truncation, depth=0):
    """Recursive Newton-Puiseux for a multiple characteristic root."""
    if depth > 6:
        raise BranchFailure("Newton-Puiseux recursion exceeded depth limit")
    # substitute X = u^p, Y = u^q (d0 + w) and recurse on the new curve in (u, w)
    m0 = min(p * k + q * l for (k, l) in f.terms)
    sub = {}
    for (k, l), c in f.terms.items():
        base = p * k + q * l - m0
        cc = as_complex(c)
        # expand (d0 + w)^l
        for r in range(l + 1):
            coef = cc * math.comb(l, r) * d0 ** (l - r)
            m = (base, r)
            sub[m] = sub.get(m, 0j) + coef
    g = BivarPoly({m: c for m, c in sub.items() if abs(c) > 1e-14}, "float")
    if g.is_zero():
        raise BranchFailure("degenerate substitution in Newton-Puiseux recursion")
    branches = []
    for b in puiseux_branches(g, truncation):
        pp = b.x_exponent  # u = s^pp
        # w(s) with valuation > 0; Y = s^(q*pp) (d0 + w)
        w = b.y_series
        d0s = LaurentSeries([d0], val=0, order=w.order)
        ytail = (d0s + w).shift(q * pp)
        branches.append(
            PuiseuxBranch(
                x_exponent=p * pp,
                y_valuation=q * pp,
                y_series=ytail.truncate(truncation + q * pp + 1),
                segment=seg,
            )
        )
    return branches


# ---------------------------------------------------------------------------
# chart polynomials
# ---------------------------------------------------------------------------

def chart_closure(f: BivarPoly, h, degree: int) -> BivarPoly:
    """F*(X, Y) = X^degree (F(1/X, Y/X) - h) for a polynomial of that degree."""
    f = f.to_float()
    terms = {}
    for (i, j), c in f.terms.items():
        m = (degree - i - j, j)
        terms[m] = terms.get(m, 0j) + as_complex(c)
    m = (degree, 0)
    terms[m] = terms.get(m, 0j) - complex(h)
    return BivarPoly(terms, "float").clean()


def rotated_hamiltonian(sys: HomogeneousHamiltonianSystem, point: InfinitePoint):
    """H in the rotated frame (x~, y~) = (x, alpha x - beta y).

    Sends [beta:alpha:0] to [1:0:0]; requires beta != 0.  Returns the
    transformed polynomial F with F(x~, y~) = H(x, y).
    """
    beta, alpha = point.beta, point.alpha
    if beta == 0:
        raise ValueError("rotated chart needs beta != 0; use the swapped system")
    h = sys.to_float().h_poly()
    # inverse map: x = x~, y = (alpha x~ - y~)/beta
    return h.substitute_linear(1.0, 0.0, alpha / beta, -1.0 / beta).clean()


def swapped_system(sys: HomogeneousHamiltonianSystem) -> HomogeneousHamiltonianSystem:
    """The system with x and y interchanged: a_j -> a_{n+1-j}."""
    return HomogeneousHamiltonianSystem(
        sys.n, list(reversed(list(sys.a))), sys.field
    )


# ---------------------------------------------------------------------------
# residues of the period form at infinity
# ---------------------------------------------------------------------------

def residues_at_infinity(
    sys: HomogeneousHamiltonianSystem,
    h,
    point: InfinitePoint,
    truncation: int | None = None,
):
    """Residues of dx/H_y on every branch of the closure at one infinite point.

    Substitutes each truncated Puiseux branch into the period form and reads
    the s^-1 coefficient; the truncation is raised automatically when the
    Laurent bookkeeping shows the residue coefficient is not yet determined.
    Returns a list of (branch, residue).
    """
    n = sys.n
    if truncation is None:
        truncation = DEFAULT_TRUNCATION_FACTOR * (n + 1)
    if point.is_py:
        # dx/H_y = -dy/H_x on the fiber: residue at Py equals minus the
        # residue at Px of the coordinate-swapped system.
        sw = swapped_system(sys)
        pts = [p for p in points_at_infinity(sw) if p.is_px]
        out = []
        for branch, r in residues_at_infinity(sw, h, pts[0], truncation):
            branch.chart = "Py"
            out.append((branch, -r))
        return out
    for attempt in range(4):
        try:
            return _residues_px_chart(sys, h, point, truncation * (2**attempt))
        except BranchFailure:
            continue
    raise BranchFailure("residue undetermined at maximal truncation")


def _residues_px_chart(sys, h, point, truncation):
    n = sys.n
    beta, alpha = point.beta, point.alpha
    if point.is_px:
        # direct chart keeps y itself, matching the rotated convention
        # y~ = alpha x - beta y at (alpha, beta) = (0, -1)
        fr = sys.to_float().h_poly()
        beta = -1.0 + 0j
    else:
        fr = rotated_hamiltonian(sys, point)
    fstar = chart_closure(fr, h, n + 1)
    fy = fr.partial_derivative("y")  # F_{y~}
    branches = puiseux_branches(fstar, truncation)
    out = []
    for b in branches:
        p = b.x_exponent
        order = b.y_series.order
        xs = LaurentSeries.monomial(1.0, -p, order + 2 * p * (n + 2))
        # chart: X = 1/x~, Y = y~/x~ so y~ = Y * x~
        ys = b.y_series * xs
        denom = _poly_on_branch(fy, xs, ys, order)
        if denom.is_zero() or denom.valuation() is None:
            raise BranchFailure("period form denominator vanished on branch")
        # omega = -(1/beta) dx~ / F_y~ with dx~ = -p s^(-p-1) ds
        core = denom.reciprocal().scale(p / beta)
        residue = core.coeff(p)  # s^(-p-1) * core: coefficient of s^(-1)
        b.chart = point.label() if not point.is_px else "Px"
        b.rotation = (alpha, beta)
        out.append((b, residue))
    return out


def residue_sum_all_points(sys, h, truncation=None):
    """Sum of residues over all branches of all infinite points."""
    total = 0j
    for pt in points_at_infinity(sys):
        for _, r in residues_at_infinity(sys, h, pt, truncation):
            total += r
    return total


# ---------------------------------------------------------------------------
# lambda indices
# ---------------------------------------------------------------------------

def lambda_index(sys: HomogeneousHamiltonianSystem, h) -> int:
    """Degree drop of the discriminant of H - h in y at the value h.

    Computed in the exact field whenever the system carries exact
    coefficients.
    """
    if all(is_zero(c) for c in sys.a):
        raise LinearSystem("lambda index needs a nonzero H_{n+1}")
    hp = sys.h_poly()
    if hp.degree_in("y") < 2:
        return 0
    disc = discriminant_in_y(hp, shift_by_h=True)
    return degree_drop_at(disc, h)


def _ramification_points(sys, disc, h):
    """Solutions of {H = h, H_y = 0} via x-roots of the discriminant."""
    fsys = sys.to_float()
    xpoly = trim([complex(v) for v in disc.to_float().x_poly_at(h)])
    if len(xpoly) <= 1:
        return []
    pts = []
    for x0, mult in univariate_roots(xpoly):
        ycands = trim(_dense_y(fsys.hy_poly(), x0))
        if len(ycands) <= 1:
            continue
        best = None
        for y0, _ in univariate_roots(ycands):
            r = abs(fsys.h_values(x0, y0) - h)
            if best is None or r < best[0]:
                best = (r, y0)
        if best is None:
            continue
        y0 = best[1]
        if abs(x0) ** 2 + abs(y0) ** 2 > TRACK_ESCAPE_RADIUS:
            x1, y1 = complex(x0), complex(y0)  # escaped; no polish needed
        else:
            x1, y1 = _polish_ram(fsys, x0, y0, h)
        for _ in range(mult):
            pts.append((x1, y1))
    return pts


def _dense_y(p: BivarPoly, x0):
    dy = p.degree_in("y")
    out = np.zeros(dy + 1, dtype=complex)
    for (i, j), c in p.terms.items():
        out[j] += as_complex(c) * x0 ** i
    return out


def _polish_ram(fsys, x, y, h):
    for _ in range(40):
        f = np.array([fsys.h_values(x, y) - h, fsys.hy_values(x, y)])
        hxx, hxy, hyy = fsys.hessian(x, y)
        jac = np.array(
            [[fsys.hx_values(x, y), fsys.hy_values(x, y)], [hxy, hyy]], dtype=complex
        )
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            break
        x, y = x - step[0], y - step[1]
        if np.max(np.abs(step)) < 1e-13:
            break
    return complex(x), complex(y)


def lambda_index_at_point(
    sys: HomogeneousHamiltonianSystem,
    h,
    point: InfinitePoint,
    angle: float = TRACK_ANGLE,
) -> int:
    """Ramification points escaping to one infinite point as h' -> h.

    Tracks the solution set of {H = h', H_y = 0} along the ray
    h' = h + t e^(i angle) by nearest-neighbor matching while t shrinks
    geometrically; escaped solutions are classified by their projective
    direction.  Retries at a second ray angle on matching ambiguity.
    """
    try:
        return _lambda_track(sys, h, point, angle)
    except TrackingLost:
        return _lambda_track(sys, h, point, TRACK_ANGLE_RETRY)


def _lambda_track(sys, h, point, angle):
    fsys = sys.to_float()
    hp = fsys.h_poly()
    if hp.degree_in("y") < 2:
        return 0
    disc = discriminant_in_y(hp, shift_by_h=True)
    h = complex(h)
    t = 0.05
    with np.errstate(all="ignore"):
        prev = _ramification_points(fsys, disc, h + t * np.exp(1j * angle))
        if not prev:
            return 0
        assigned = None
        stable = 0
        for _ in range(60):
            t *= 0.55
            cur = _ramification_points(fsys, disc, h + t * np.exp(1j * angle))
            if len(cur) != len(prev):
                raise TrackingLost("ramification solution count changed along ray")
            cur = _match(prev, cur)
            esc = _classify_escaped(fsys, cur, point)
            if esc == assigned:
                stable += 1
                if stable >= 3 and t < 1e-6:
                    return esc
            else:
                assigned = esc
                stable = 0
            prev = cur
    return assigned if assigned is not None else 0


def _match(prev, cur):
    """Nearest-neighbor matching in the chordal metric of CP^2 coordinates."""
    def chord(a, b):
        # compare in projective-friendly coordinates to keep escapes stable
        za = np.array([a[0], a[1], 1.0])
        zb = np.array([b[0], b[1], 1.0])
        za = za / np.max(np.abs(za))
        zb = zb / np.max(np.abs(zb))
        za = za / np.linalg.norm(za)
        zb = zb / np.linalg.norm(zb)
        inner = abs(np.vdot(za, zb))
        return np.sqrt(max(1.0 - inner**2, 0.0))

    out = []
    used = set()
    for a in prev:
        best, bestd = None, None
        for k, b in enumerate(cur):
            if k in used:
                continue
            d = chord(a, b)
            if bestd is None or d < bestd:
                best, bestd = k, d
        used.add(best)
        out.append(cur[best])
    return out


def _classify_escaped(fsys, pts, point):
    count = 0
    for x, y in pts:
        r2 = abs(x) ** 2 + abs(y) ** 2
        if r2 < TRACK_ESCAPE_RADIUS:
            continue
        # projective direction [x : y]; infinite point is [beta : alpha]
        if abs(point.beta) >= abs(point.alpha):
            # compare y/x to alpha/beta
            if abs(y / x - point.alpha / point.beta) < 0.05:
                count += 1
        else:
            if abs(x / y - point.beta / point.alpha) < 0.05:
                count += 1
    return count
