"""The family H(x,y) = xy + sum_j a_j x^(n+1-j) y^j and its critical geometry.

Covers the isochronicity classifier, the resonance and non-isolated-locus
tests, the admissibility certificate, finite critical points with A_k tags,
and the atypical value set.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield
from enum import Enum

import numpy as np

from .errors import LengthMismatch, NonIsolatedSingularities
from .field import EXACT, FLOAT, GaussianRational, as_complex, is_zero
from .poly import (
    BivarPoly,
    UniPolyOverH,
    degree_drop_at,
    discriminant_in_y,
    resultant_in_y,
    trim,
)
from .roots import univariate_roots

CRITICAL_RESIDUAL = 1e-10
NEWTON_STEP_TOL = 1e-13
NEWTON_MAX_ITER = 50
VALUE_MERGE_TOL = 1e-9
HESSIAN_RANK_REL = 1e-8


class Verdict(Enum):
    CONDITION_I = "IsochronousConditionI"
    CONDITION_II = "IsochronousConditionII"
    BOTH = "IsochronousBoth"
    NOT_ISOCHRONOUS = "NotIsochronous"

    @property
    def isochronous(self):
        return self is not Verdict.NOT_ISOCHRONOUS


@dataclass(frozen=True)
class IsochronicityVerdict:
    verdict: Verdict
    # for NOT_ISOCHRONOUS: either ("resonant", index) or ("pair", (j, k))
    witness: tuple | None = None


@dataclass(frozen=True)
class CriticalPoint:
    location: tuple  # (x0, y0) complex
    value: complex
    hessian_rank: int
    milnor_number: int
    ak_type: int
    isolated: bool = True
    polished: bool = True  # False downgrades the point to a warning


class HomogeneousHamiltonianSystem:
    """Degree-n system with H(x,y) = xy + sum_{j=0}^{n+1} a_j x^(n+1-j) y^j."""

    def __init__(self, n: int, a, field: str = FLOAT):
        if n < 2:
            raise LengthMismatch("system degree must be at least 2")
        a = list(a)
        if len(a) != n + 2:
            raise LengthMismatch(f"need {n + 2} coefficients for degree {n}")
        self.n = n
        self.field = field
        if field == EXACT:
            self.a = tuple(
                c if isinstance(c, GaussianRational) else GaussianRational(c) for c in a
            )
        else:
            self.a = tuple(complex(c) for c in a)
        self._a_complex = np.array([as_complex(c) for c in self.a])

    def __repr__(self):
        return f"HomogeneousHamiltonianSystem(n={self.n}, a={list(self.a)!r})"

    # -- polynomial views -------------------------------------------------------

    def h_poly(self) -> BivarPoly:
        one = GaussianRational(1) if self.field == EXACT else 1 + 0j
        terms = {(1, 1): one}
        for j, c in enumerate(self.a):
            if not is_zero(c):
                m = (self.n + 1 - j, j)
                terms[m] = terms.get(m, 0 * c) + c
        return BivarPoly(terms, self.field)

    def hx_poly(self) -> BivarPoly:
        return self.h_poly().partial_derivative("x")

    def hy_poly(self) -> BivarPoly:
        return self.h_poly().partial_derivative("y")

    def nonlinearity(self) -> BivarPoly:
        """The homogeneous part H_{n+1}."""
        return self.h_poly().homogeneous_part(self.n + 1)

    def to_float(self) -> "HomogeneousHamiltonianSystem":
        if self.field == FLOAT:
            return self
        return HomogeneousHamiltonianSystem(self.n, [as_complex(c) for c in self.a], FLOAT)

    # -- fast vectorized evaluation ----------------------------------------------

    def h_values(self, x, y):
        """H(x, y) with numpy broadcasting."""
        return x * y + _homog_eval(self._a_complex, self.n, x, y)

    def hy_values(self, x, y):
        """H_y(x, y) = x + d(H_{n+1})/dy."""
        a = self._a_complex
        n = self.n
        acc = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for j in range(n + 1, 0, -1):
            acc = acc * y + j * a[j] * x ** (n + 1 - j)
        return x + acc

    def hx_values(self, x, y):
        """H_x(x, y) = y + d(H_{n+1})/dx."""
        a = self._a_complex
        n = self.n
        acc = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for j in range(n, -1, -1):
            acc = acc * y + (n + 1 - j) * a[j] * x ** (n - j)
        return y + acc

    def hessian(self, x, y):
        a = self._a_complex
        n = self.n
        hxx = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        hxy = np.zeros_like(hxx)
        hyy = np.zeros_like(hxx)
        for j in range(n + 2):
            i = n + 1 - j
            c = a[j]
            if c == 0:
                continue
            if i >= 2:
                hxx += c * i * (i - 1) * x ** (i - 2) * y ** j
            if i >= 1 and j >= 1:
                hxy += c * i * j * x ** (i - 1) * y ** (j - 1)
            if j >= 2:
                hyy += c * j * (j - 1) * x ** i * y ** (j - 2)
        return hxx, hxy + 1.0, hyy


def _homog_eval(a, n, x, y):
    acc = np.zeros(np.broadcast(x, y).shape, dtype=complex) + a[n + 1]
    for j in range(n, -1, -1):
        acc = acc * y + a[j] * x ** (n + 1 - j)
    return acc


def build_h(sys: HomogeneousHamiltonianSystem) -> BivarPoly:
    """The Hamiltonian as a sparse polynomial (term-for-term layout)."""
    return sys.h_poly()


def vector_field(sys: HomogeneousHamiltonianSystem, x, y):
    """(dx/dt, dy/dt) = (H_y, -H_x)."""
    return sys.hy_values(x, y), -sys.hx_values(x, y)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def classify_isochronicity(sys: HomogeneousHamiltonianSystem) -> IsochronicityVerdict:
    """Necessary and sufficient isochronicity conditions for the family.

    Condition I: a_j = 0 for all integers j with 2j <= n+1.
    Condition II: a_j = 0 for all integers j with 2j >= n+1.
    Integer arithmetic keeps the odd-n boundary index exact.
    """
    n = sys.n
    cond1 = all(is_zero(c) for j, c in enumerate(sys.a) if 2 * j <= n + 1)
    cond2 = all(is_zero(c) for j, c in enumerate(sys.a) if 2 * j >= n + 1)
    if cond1 and cond2:
        return IsochronicityVerdict(Verdict.BOTH)
    if cond1:
        return IsochronicityVerdict(Verdict.CONDITION_I)
    if cond2:
        return IsochronicityVerdict(Verdict.CONDITION_II)
    if n % 2 == 1 and not is_zero(sys.a[(n + 1) // 2]):
        return IsochronicityVerdict(
            Verdict.NOT_ISOCHRONOUS, ("resonant", (n + 1) // 2)
        )
    j = min(k for k, c in enumerate(sys.a) if not is_zero(c) and 2 * k < n + 1)
    k = max(k for k, c in enumerate(sys.a) if not is_zero(c) and 2 * k > n + 1)
    return IsochronicityVerdict(Verdict.NOT_ISOCHRONOUS, ("pair", (j, k)))


def resonance_obstruction(sys: HomogeneousHamiltonianSystem) -> bool:
    """True iff n is odd and the resonant coefficient a_{(n+1)/2} is nonzero."""
    return sys.n % 2 == 1 and not is_zero(sys.a[(sys.n + 1) // 2])


def non_isolated_locus(sys: HomogeneousHamiltonianSystem) -> bool:
    """True iff n is odd and H_{n+1} = a_N x^N y^N with N = (n+1)/2."""
    if sys.n % 2 == 0:
        return False
    mid = (sys.n + 1) // 2
    if is_zero(sys.a[mid]):
        return False
    return all(is_zero(c) for j, c in enumerate(sys.a) if j != mid)


def admissible_nonlinearities(sys: HomogeneousHamiltonianSystem) -> bool:
    """Sign certificate for linearizability of the resonant saddle.

    With eigenvalues p = 1, q = -1 every nonlinear term of the system
    contributes the integer p(n+1-j)+q(j-1)-p = p(n-j)+qj-q = n+1-2j.
    Admissible iff the collected integers are empty or share one strict
    sign; a zero element or mixed signs admit a vanishing non-negative
    integer combination.
    """
    n = sys.n
    s = set()
    for j, c in enumerate(sys.a):
        if is_zero(c):
            continue
        if j < n + 1:  # term survives in -H_x
            s.add(n + 1 - 2 * j)
        if j > 0:  # term survives in H_y
            s.add(n + 1 - 2 * j)
    if not s:
        return True
    if 0 in s:
        return False
    return all(v > 0 for v in s) or all(v < 0 for v in s)


# ---------------------------------------------------------------------------
# finite critical points
# ---------------------------------------------------------------------------

def _resultant_x_poly(sys: HomogeneousHamiltonianSystem):
    """Res_y(H_x, H_y) as a dense ascending x-polynomial (floating)."""
    fsys = sys.to_float()
    hx = fsys.hx_poly()
    hy = fsys.hy_poly()
    res = resultant_in_y(hx, hy, shift_p_by_h=False)
    # no h dependence: each x-coefficient list is a constant polynomial
    return trim([c[0] if c else 0j for c in res.coeffs])


def _polish_point(sys, x, y):
    for _ in range(NEWTON_MAX_ITER):
        f = np.array([sys.hx_values(x, y), sys.hy_values(x, y)])
        hxx, hxy, hyy = sys.hessian(x, y)
        jac = np.array([[hxx, hxy], [hxy, hyy]], dtype=complex)
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jac, f, rcond=None)
        x, y = x - step[0], y - step[1]
        if np.max(np.abs(step)) < NEWTON_STEP_TOL:
            break
    return complex(x), complex(y)


def _hessian_rank(sys, x, y):
    hxx, hxy, hyy = sys.hessian(x, y)
    m = np.array([[hxx, hxy], [hxy, hyy]], dtype=complex)
    sv = np.linalg.svd(m, compute_uv=False)
    scale = max(sv[0], 1.0)
    return int(np.sum(sv > HESSIAN_RANK_REL * scale))


def finite_critical_points(sys: HomogeneousHamiltonianSystem):
    """All solutions of H_x = H_y = 0 with Hessian rank, Milnor number, A_k.

    Elimination: x-roots of Res_y(H_x, H_y), back substitution in y, then a
    2x2 Newton polish.  The Milnor number of a degenerate point is the
    resultant root multiplicity at its x-coordinate minus the count of
    nondegenerate points sharing that coordinate.
    """
    if non_isolated_locus(sys):
        raise NonIsolatedSingularities("critical locus contains a curve")
    fsys = sys.to_float()
    rx = _resultant_x_poly(fsys)
    if len(rx) == 1 and rx[0] == 0:
        raise NonIsolatedSingularities("eliminating resultant vanishes identically")
    points = []
    scale = 1.0 + float(np.max(np.abs(fsys._a_complex)))
    for x0, mult in univariate_roots(rx):
        # y-candidates from H_y(x0, .) = 0 and H_x(x0, .) = 0
        hy_c = trim(_dense_y_coeffs(fsys.hy_poly(), x0))
        hx_c = trim(_dense_y_coeffs(fsys.hx_poly(), x0))
        cands = []
        for c in (hy_c, hx_c):
            if len(c) > 1:
                cands.extend(r for r, _ in univariate_roots(c))
        found = []
        for y0 in cands:
            x1, y1 = _polish_point(fsys, x0, y0)
            res = abs(fsys.hx_values(x1, y1)) + abs(fsys.hy_values(x1, y1))
            if res > CRITICAL_RESIDUAL * scale:
                continue
            # the polished point must stay attached to this resultant root
            if abs(x1 - x0) > 1e-6 * (1 + abs(x0)):
                continue
            if any(abs(x1 - p[0]) + abs(y1 - p[1]) < 1e-8 for p in found):
                continue
            found.append((x1, y1, True))
        ranks = [_hessian_rank(fsys, p[0], p[1]) for p in found]
        degenerate = [i for i, r in enumerate(ranks) if r < 2]
        budget = mult - sum(1 for r in ranks if r == 2)
        for i, (x1, y1, ok) in enumerate(found):
            if ranks[i] == 2:
                mu = 1
            else:
                mu = max(budget // max(len(degenerate), 1), 2)
            points.append(
                CriticalPoint(
                    location=(x1, y1),
                    value=complex(fsys.h_values(x1, y1)),
                    hessian_rank=ranks[i],
                    milnor_number=mu,
                    ak_type=mu,
                    isolated=True,
                    polished=ok,
                )
            )
    return points


def _dense_y_coeffs(p: BivarPoly, x0):
    dy = p.degree_in("y")
    out = np.zeros(dy + 1, dtype=complex)
    for (i, j), c in p.terms.items():
        out[j] += as_complex(c) * x0 ** i
    return out


def l0_extra_critical_points(sys: HomogeneousHamiltonianSystem):
    """Critical points on L_0 other than the origin (Morse saddles).

    Nonempty iff a_0 = 0, a_1 != 0 (points (x_j, 0) with 1 + a_1 x^(n-1) = 0)
    or a_{n+1} = 0, a_n != 0 (points (0, y_j) with 1 + a_n y^(n-1) = 0).
    """
    fsys = sys.to_float()
    n = sys.n
    out = []
    if is_zero(sys.a[0]) and not is_zero(sys.a[1]):
        coeffs = np.zeros(n, dtype=complex)
        coeffs[0] = 1.0
        coeffs[n - 1] = as_complex(sys.a[1])
        for r, _ in univariate_roots(coeffs):
            out.append(_saddle_point(fsys, r, 0.0))
    if is_zero(sys.a[n + 1]) and not is_zero(sys.a[n]):
        coeffs = np.zeros(n, dtype=complex)
        coeffs[0] = 1.0
        coeffs[n - 1] = as_complex(sys.a[n])
        for r, _ in univariate_roots(coeffs):
            out.append(_saddle_point(fsys, 0.0, r))
    return out


def _saddle_point(fsys, x0, y0):
    return CriticalPoint(
        location=(complex(x0), complex(y0)),
        value=complex(fsys.h_values(x0, y0)),
        hessian_rank=_hessian_rank(fsys, x0, y0),
        milnor_number=1,
        ak_type=1,
    )


def atypical_values(sys: HomogeneousHamiltonianSystem):
    """Critical values plus the h where the discriminant drops x-degree.

    Returns a sorted list of complex values, duplicates merged within
    VALUE_MERGE_TOL.
    """
    pts = finite_critical_points(sys)
    values = [p.value for p in pts]
    hpoly = sys.to_float().h_poly()
    if hpoly.degree_in("y") >= 2:
        disc = discriminant_in_y(hpoly, shift_by_h=True)
        lead = trim([as_complex(v) for v in disc.leading_h_poly()])
        if len(lead) > 1:
            values.extend(r for r, _ in univariate_roots(lead))
    merged: list[complex] = []
    for v in sorted(values, key=lambda z: (abs(z), z.real, z.imag)):
        if not any(abs(v - w) < VALUE_MERGE_TOL * (1 + abs(w)) for w in merged):
            merged.append(complex(v))
    return merged
