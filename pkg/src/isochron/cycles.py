"""Numerical cycles on the level curves: lifts, periods, continuation.

Loops are theta-uniform closed chains of fiber points.  Transport along a
path in the h-plane re-solves y at fixed x per sample; correctness is
guarded by three monitors learned the hard way:

* steps are capped by the local y-root separation estimate |H_y|/|H_yy|
  so Newton cannot silently swap sheets;
* ramification x-positions (roots of the discriminant at the current h)
  are tracked, and when one approaches the chain the affected samples are
  pushed radially aside by a smooth in-fiber deformation before it passes;
* adjacent-gap growth rejects a step outright, halving it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import (
    BlowupChartFailure,
    BranchJump,
    CaseMismatch,
    HypothesisNotMet,
    NewtonDivergence,
    QuadratureStall,
    RamificationCollision,
)
from .field import as_complex, is_zero
from .hamiltonian import (
    CriticalPoint,
    HomogeneousHamiltonianSystem,
    atypical_values,
    l0_extra_critical_points,
)
from .infinity import InfinitePoint, points_at_infinity, swapped_system
from .poly import discriminant_in_y, trim
from .roots import univariate_roots

FIBER_RTOL = 1e-10
QUAD_TARGET = 1e-9
DEFAULT_SAMPLES = 512
STEP_FRACTION = 0.02
SEPARATION_FRACTION = 0.2
NEWTON_TOL = 1e-13
PATH_CLEARANCE = 0.1  # of the min pairwise atypical distance


# ---------------------------------------------------------------------------
# loops and periods
# ---------------------------------------------------------------------------

@dataclass
class FiberLoop:
    """Closed theta-uniform chain of points on the fiber H = h.

    ``covering`` divides the chain integral: pushforwards of blow-up loops
    traverse their geometric image multiple times.
    """

    sys: HomogeneousHamiltonianSystem
    h: complex
    xs: np.ndarray
    ys: np.ndarray
    anchor: str = "origin"
    orientation: str = "standard"
    covering: int = 1

    @property
    def samples(self):
        return self.xs.size

    def residual(self):
        return float(np.max(np.abs(self.sys.h_values(self.xs, self.ys) - self.h)))

    def min_hy(self):
        return float(np.min(np.abs(self.sys.hy_values(self.xs, self.ys))))

    def max_gap(self):
        dy = np.abs(np.diff(np.r_[self.ys, self.ys[0]]))
        return float(np.max(dy))

    def validate(self):
        if self.residual() > FIBER_RTOL * (1.0 + abs(self.h)):
            raise NewtonDivergence(f"fiber residual {self.residual():.2e} too large")
        if self.min_hy() <= 0.0:
            raise RamificationCollision("loop sample sits on a ramification point")
        return self

    def reversed(self):
        return FiberLoop(
            self.sys,
            self.h,
            self.xs[::-1].copy(),
            self.ys[::-1].copy(),
            anchor=self.anchor,
            orientation="reversed" if self.orientation == "standard" else "standard",
            covering=self.covering,
        )


@dataclass
class PeriodSample:
    h: complex
    value: complex
    anchor: str
    quadrature_error: float


def _fft_derivative(z):
    n = z.size
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k = k.copy()
        k[n // 2] = 0.0
    return np.fft.ifft(np.fft.fft(z) * (1j * k))


def period(loop: FiberLoop) -> PeriodSample:
    """Trapezoid (spectral) quadrature of dx/H_y over the loop.

    The quadrature error is estimated against the half-sample-count result.
    """
    def integral(xs, ys):
        integrand = _fft_derivative(xs) / loop.sys.hy_values(xs, ys)
        return complex(np.mean(integrand) * 2.0 * np.pi)

    t_full = integral(loop.xs, loop.ys)
    t_half = integral(loop.xs[::2], loop.ys[::2])
    err = abs(t_full - t_half) / loop.covering
    return PeriodSample(
        h=loop.h,
        value=t_full / loop.covering,
        anchor=loop.anchor,
        quadrature_error=err,
    )


# ---------------------------------------------------------------------------
# vectorized y-solves
# ---------------------------------------------------------------------------

def _newton_y(sys, xs, ys, h, tol=NEWTON_TOL, iters=60):
    target = tol * (1.0 + abs(h))
    ok = False
    for _ in range(iters):
        f = sys.h_values(xs, ys) - h
        if np.max(np.abs(f)) < target:
            ok = True
            break
        hy = sys.hy_values(xs, ys)
        if np.any(hy == 0):
            return ys, False
        ys = ys - f / hy
    else:
        ok = bool(np.max(np.abs(sys.h_values(xs, ys) - h)) < target)
    return ys, ok


def _hyy_values(sys, xs, ys):
    return sys.hessian(xs, ys)[2]


# ---------------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------------

def lift_origin_loop(
    sys: HomogeneousHamiltonianSystem,
    h,
    samples: int = DEFAULT_SAMPLES,
    radius_factor: float = 1.0,
    max_halvings: int = 8,
) -> FiberLoop:
    """The vanishing cycle at the origin: x on a circle, y Newton-solved.

    x = rho e^(i theta) with rho = radius_factor sqrt|h|; y starts from the
    Morse seed h/x.  A branch jump (adjacent y-gap above rho/4) halves the
    radius and retries.
    """
    fsys = sys.to_float()
    h = complex(h)
    if h == 0:
        raise NewtonDivergence("origin loop needs h != 0")
    theta = 2.0 * np.pi * np.arange(samples) / samples
    base = radius_factor * np.sqrt(abs(h))
    # ladder both ways: inner ramification clusters (scale |h|^(2/3)) can
    # poke inside the sqrt|h| circle at moderate |h|, and shrinking the
    # radius inflates |y| = |h|/rho, so neither direction works alone
    ladder = [1.0, 2.0, 0.5, 4.0, 0.25, 8.0, 0.125, 16.0][: max(max_halvings, 1)]
    last_error: Exception | None = None
    for fac in ladder:
        rho = base * fac
        xs = rho * np.exp(1j * theta)
        ys, ok = _newton_y(fsys, xs, h / xs, h)
        if not ok:
            last_error = NewtonDivergence("origin lift Newton failed")
            continue
        loop = FiberLoop(fsys, h, xs, ys, anchor="origin")
        if loop.max_gap() > rho / 4.0:
            last_error = BranchJump("adjacent y-gap exceeds rho/4")
            continue
        try:
            loop.validate()
        except Exception as exc:
            last_error = exc
            continue
        return _orient(loop)
    raise last_error if last_error is not None else NewtonDivergence("lift failed")


def _orient(loop: FiberLoop) -> FiberLoop:
    if period(loop).value.imag < 0:
        return loop.reversed()
    return loop


def lift_saddle_loop(
    sys: HomogeneousHamiltonianSystem,
    h,
    saddle: CriticalPoint,
    samples: int = DEFAULT_SAMPLES,
    radius_factor: float = 1.0,
) -> FiberLoop:
    """Local Morse cycle at an L_0 saddle, on the fiber H = h.

    The Hessian quadratic form is factored into two independent linear
    forms z w; the loop fixes z on a circle and Newton-solves along the w
    coordinate direction.
    """
    fsys = sys.to_float()
    h = complex(h)
    x0, y0 = saddle.location
    h0 = complex(saddle.value)
    if abs(h - h0) == 0:
        raise NewtonDivergence("saddle loop needs h != critical value")
    hxx, hxy, hyy = fsys.hessian(x0, y0)
    a2, b, c2 = complex(hxx), complex(hxy), complex(hyy)
    # H - h0 ~ (1/2)(a2 xi^2 + 2 b xi eta + c2 eta^2) =: z * w
    if abs(a2) >= abs(c2) and abs(a2) > 1e-12:
        disc = np.sqrt(b * b - a2 * c2)
        r1 = (-b + disc) / a2
        r2 = (-b - disc) / a2
        # z = xi - r1 eta, w = (a2/2)(xi - r2 eta)
        def to_xy(z, w):
            eta = (z - 2.0 * w / a2) / (r1 - r2)
            xi = z - r1 * eta
            return xi, eta

        dxi_dw, deta_dw = _dir_derivative(to_xy)
    elif abs(c2) > 1e-12:
        disc = np.sqrt(b * b - a2 * c2)
        r1 = (-b + disc) / c2
        r2 = (-b - disc) / c2
        # z = eta - r1 xi, w = (c2/2)(eta - r2 xi)
        def to_xy(z, w):
            xi = (z - 2.0 * w / c2) / (r1 - r2)
            eta = z - r1 * xi
            return xi, eta

        dxi_dw, deta_dw = _dir_derivative(to_xy)
    else:
        if abs(b) < 1e-12:
            raise NewtonDivergence("saddle Hessian is degenerate")

        def to_xy(z, w):
            return z, w / b

        dxi_dw, deta_dw = _dir_derivative(to_xy)

    theta = 2.0 * np.pi * np.arange(samples) / samples
    dh = h - h0
    radius = radius_factor * np.sqrt(abs(dh))
    for _ in range(10):
        z = radius * np.exp(1j * theta)
        w = dh / z
        xi, eta = to_xy(z, w)
        xs, ys = x0 + xi, y0 + eta
        xs0 = xs.copy()
        # 1D Newton along the w-direction
        ok = False
        t = np.zeros(samples, dtype=complex)
        for _ in range(60):
            f = fsys.h_values(xs, ys) - h
            if np.max(np.abs(f)) < NEWTON_TOL * (1.0 + abs(h)):
                ok = True
                break
            df = fsys.hx_values(xs, ys) * dxi_dw + fsys.hy_values(xs, ys) * deta_dw
            if np.any(df == 0):
                break
            step = f / df
            xs = xs - step * dxi_dw
            ys = ys - step * deta_dw
        if ok:
            loop = FiberLoop(fsys, h, xs, ys, anchor="saddle")
            gap = float(np.max(np.abs(np.diff(np.r_[ys, ys[0]])))) + float(
                np.max(np.abs(np.diff(np.r_[xs, xs[0]])))
            )
            if gap < max(radius, float(np.max(np.abs(w)))) and loop.residual() < FIBER_RTOL * (
                1 + abs(h)
            ):
                loop.validate()
                return _orient(loop)
        radius *= 0.6
    raise NewtonDivergence("saddle lift failed after radius reductions")


def _dir_derivative(to_xy):
    xi0, eta0 = to_xy(0.0, 0.0)
    xi1, eta1 = to_xy(0.0, 1.0)
    return xi1 - xi0, eta1 - eta0


def lift_infinity_cycles(
    sys: HomogeneousHamiltonianSystem,
    h,
    point: InfinitePoint,
    samples: int = DEFAULT_SAMPLES,
    u_radius: float | None = None,
) -> list[FiberLoop]:
    """The N blow-up saddle cycles at P_x (or P_y) pushed back to (x, y).

    Requires the mixed hypothesis and 1 < N < (n+1)/2.  In the chart
    (X, Y) = (1/x, y/x) the quasi-homogeneous substitution
    (X, Y) = (u^(N-1), u^(n-1) v) turns the level set into
    u^(n+1-2N) v (1 + v^(N-1) Q(1, u^(n-1) v)) = h with N saddles on u = 0;
    each contributes one loop.  The pushforward covers its image N-1 times
    in the parameterization, so returned loops carry covering = N-1.
    """
    from .hamiltonian import classify_isochronicity, Verdict

    if classify_isochronicity(sys).verdict is not Verdict.NOT_ISOCHRONOUS:
        raise HypothesisNotMet("infinity cycles need the mixed hypothesis")
    if point.is_py:
        sw = swapped_system(sys)
        px = [p for p in points_at_infinity(sw) if p.is_px]
        if not px:
            raise HypothesisNotMet("P_y is not an infinite point of the closure")
        loops = lift_infinity_cycles(sw, h, px[0], samples, u_radius)
        out = []
        for lp in loops:
            swapped = FiberLoop(
                sys.to_float(),
                lp.h,
                lp.ys.copy(),
                lp.xs.copy(),
                anchor=lp.anchor.replace("Px", "Py"),
                covering=lp.covering,
            )
            swapped.validate()
            out.append(_orient(swapped))
        return out
    if not point.is_px:
        raise HypothesisNotMet("infinity cycles are defined at P_x or P_y")
    n = sys.n
    n1 = point.multiplicity
    if not (1 < n1 < (n + 1) / 2):
        raise HypothesisNotMet("multiplicity must satisfy 1 < N < (n+1)/2")
    fsys = sys.to_float()
    h = complex(h)
    a = fsys._a_complex
    k = n + 1 - 2 * n1
    qc = a[n1:]  # Q(1, t) coefficients, ascending
    an1 = qc[0]

    def qval(t):
        acc = np.zeros_like(t) + qc[-1]
        for cc in qc[-2::-1]:
            acc = acc * t + cc
        return acc

    def qder(t):
        acc = np.zeros_like(t)
        for j in range(len(qc) - 1, 0, -1):
            acc = acc * t + j * qc[j]
        return acc

    def wval(u, v):
        y_over_x = u ** (n - 1) * v
        return u**k * v * (1.0 + v ** (n1 - 1) * qval(y_over_x))

    def wv(u, v):
        t = u ** (n - 1) * v
        g = 1.0 + v ** (n1 - 1) * qval(t)
        gv = (n1 - 1) * v ** (n1 - 2) * qval(t) + v ** (n1 - 1) * qder(t) * u ** (n - 1)
        return u**k * (g + v * gv)

    # saddle v-positions: v0 = 0 and the roots of 1 + a_{N1} v^(N1-1) = 0
    vroots = np.zeros(n1, dtype=complex)
    sat = np.zeros(n1, dtype=complex)
    sat[0] = 1.0
    sat[-1] = an1
    vj = [r for r, _ in univariate_roots(sat)]
    sep = min(abs(v) for v in vj)
    theta = 2.0 * np.pi * np.arange(samples) / samples
    radius = u_radius if u_radius is not None else 0.45
    loops = []
    for attempt in range(8):
        try:
            loops = []
            u = radius * np.exp(1j * theta)
            seeds = [("inf-Px-0", h / u**k)]
            for idx, v0 in enumerate(vj):
                gv0 = (n1 - 1) * v0 ** (n1 - 2) * an1
                seeds.append((f"inf-Px-{idx + 1}", v0 + h / (u**k * v0 * gv0)))
            for anchor, vseed in seeds:
                excursion = float(np.max(np.abs(vseed))) if anchor == "inf-Px-0" else float(
                    np.max(np.abs(vseed - vseed.mean()))
                )
                if anchor == "inf-Px-0" and excursion > 0.35 * sep:
                    raise BlowupChartFailure("v0 loop overlaps the outer saddles")
                v = vseed.copy()
                ok = False
                for _ in range(80):
                    f = wval(u, v) - h
                    if np.max(np.abs(f)) < NEWTON_TOL * (1 + abs(h)):
                        ok = True
                        break
                    v = v - f / wv(u, v)
                if not ok:
                    raise BlowupChartFailure("blow-up Newton failed")
                xs = u ** (-(n1 - 1.0))
                ys = u ** (n - n1) * v
                loop = FiberLoop(fsys, h, xs, ys, anchor=anchor, covering=n1 - 1)
                loop.validate()
                loops.append(_orient(loop))
            return loops
        except (BlowupChartFailure, NewtonDivergence, RamificationCollision):
            radius = radius * (1.25 if attempt % 2 == 0 else 0.55)
            if not (0.05 < radius < 0.95):
                break
    raise BlowupChartFailure("no admissible u-radius for the blow-up loops")


# ---------------------------------------------------------------------------
# paths in the h plane
# ---------------------------------------------------------------------------

@dataclass
class HPath:
    """Piecewise-linear path, with the atypical values it must avoid."""

    waypoints: list
    atypicals: list = dfield(default_factory=list)
    encircles: list = dfield(default_factory=list)  # (value, winding)

    def clearance(self):
        vals = [v for v in self.atypicals]
        best = np.inf
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            for v in vals:
                best = min(best, _segment_distance(a, b, v))
        return best


def _segment_distance(a, b, p):
    a, b, p = complex(a), complex(b), complex(p)
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0:
        return abs(p - a)
    t = ((p - a) * ab.conjugate()).real / denom
    t = min(max(t, 0.0), 1.0)
    return abs(a + t * ab - p)


def path_around(
    value,
    base,
    atypicals,
    radius: float | None = None,
    segments: int = 64,
) -> HPath:
    """Approach ``value`` from ``base``, encircle it counterclockwise, return.

    The circle radius defaults to the declared clearance: PATH_CLEARANCE
    times the minimal pairwise distance of the atypical set.
    """
    value = complex(value)
    base = complex(base)
    others = [complex(v) for v in atypicals if abs(complex(v) - value) > 1e-12]
    dists = [abs(v - w) for i, v in enumerate(others + [value]) for w in (others + [value])[i + 1 :]]
    min_pair = min(dists) if dists else abs(value - base)
    if radius is None:
        radius = PATH_CLEARANCE * min_pair
    radius = min(radius, 0.8 * abs(value - base))
    d = (value - base) / abs(value - base)
    entry = value - radius * d
    ang0 = float(np.angle(entry - value))
    circle = [
        value + radius * np.exp(1j * (ang0 + 2.0 * np.pi * t))
        for t in np.linspace(0.0, 1.0, segments + 1)
    ]
    pts = [base, entry] + circle[1:] + [base]
    return HPath(pts, atypicals=list(atypicals), encircles=[(value, 1)])


def circle_path(center, start, atypicals, segments: int = 64, turns: int = 1) -> HPath:
    """Full circle around ``center`` through ``start``."""
    center = complex(center)
    start = complex(start)
    r = abs(start - center)
    ang0 = float(np.angle(start - center))
    pts = [
        center + r * np.exp(1j * (ang0 + 2.0 * np.pi * turns * t))
        for t in np.linspace(0.0, 1.0, segments * max(turns, 1) + 1)
    ]
    return HPath(pts, atypicals=list(atypicals), encircles=[(center, turns)])


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------

class _Transporter:
    """Stateful transport of one loop along h-waypoints with all guards."""

    def __init__(self, loop: FiberLoop, atypicals):
        self.sys = loop.sys
        self.xs = loop.xs.copy()
        self.ys = loop.ys.copy()
        self.h = complex(loop.h)
        self.anchor = loop.anchor
        self.covering = loop.covering
        self.atypicals = [complex(v) for v in atypicals]
        self.theta = 2.0 * np.pi * np.arange(self.xs.size) / self.xs.size
        disc = discriminant_in_y(self.sys.h_poly(), shift_by_h=True)
        self._disc = disc
        self._gap_ref = self._gap()
        self.dodges = 0

    # -- helpers ---------------------------------------------------------------

    def _gap(self):
        return float(
            np.max(np.abs(np.diff(np.r_[self.ys, self.ys[0]])))
            + np.max(np.abs(np.diff(np.r_[self.xs, self.xs[0]])))
        )

    def _branch_points(self):
        xp = trim([complex(v) for v in self._disc.x_poly_at(self.h)])
        if len(xp) <= 1:
            return np.zeros(0, dtype=complex)
        return np.array([r for r, _ in univariate_roots(xp)])

    def _mesh_width(self):
        return float(np.max(np.abs(np.diff(np.r_[self.xs, self.xs[0]]))))

    # -- dodging ----------------------------------------------------------------

    def _dodge_if_needed(self):
        bx = self._branch_points()
        if bx.size == 0:
            return
        guard = 0
        while guard < 12:
            guard += 1
            d = np.abs(self.xs[:, None] - bx[None, :])
            dmin = d.min(axis=1)
            floor = 3.0 * self._mesh_width()
            k0 = int(np.argmin(dmin))
            if dmin[k0] >= floor:
                return
            b = bx[int(np.argmin(d[k0]))]
            # verify the branch point actually involves our sheet: the
            # corresponding fiber y-root collision is near our y there
            self._dodge(k0, b, floor)
        raise RamificationCollision("dodge budget exhausted")

    def _dodge(self, k0, b, floor):
        self.dodges += 1
        if self.dodges > 200:
            raise RamificationCollision("too many ramification dodges")
        sign = 1.0 if abs(self.xs[k0]) >= abs(b) else -1.0
        need = (floor * 1.7 - sign * (abs(self.xs[k0]) - abs(b))) / max(
            abs(self.xs[k0]), 1e-12
        )
        if need <= 0.0:
            return
        # smooth periodic window around theta[k0]
        d = np.abs(self.xs - b)
        covered = d < 2.5 * floor
        ext = max(
            float(np.max(np.abs(np.angle(self.xs[covered] / self.xs[k0])))),
            2.0 * np.pi / self.xs.size,
        )
        kappa = 2.0 / ext**2
        bump = np.exp(kappa * (np.cos(self.theta - self.theta[k0]) - 1.0))
        nsub = 6
        for _ in range(nsub):
            # incremental scaling keeps Newton in its basin
            xs_new = self.xs * (1.0 + sign * need * bump / nsub)
            ys_new, ok = _newton_y(self.sys, xs_new, self.ys, self.h)
            if not ok:
                raise RamificationCollision("in-fiber dodge Newton failed")
            self.xs, self.ys = xs_new, ys_new
        self._gap_ref = max(self._gap_ref, self._gap())

    # -- stepping -----------------------------------------------------------------

    def run(self, waypoints):
        for target in waypoints:
            self._advance_to(complex(target))
        return FiberLoop(
            self.sys,
            self.h,
            self.xs,
            self.ys,
            anchor=f"continued({self.anchor})",
            covering=self.covering,
        ).validate()

    def _advance_to(self, target):
        guard = 0
        while abs(target - self.h) > 0:
            guard += 1
            if guard > 200000:
                raise RamificationCollision("continuation stalled")
            self._dodge_if_needed()
            hy = self.sys.hy_values(self.xs, self.ys)
            hyy = _hyy_values(self.sys, self.xs, self.ys)
            sep = np.abs(hy) / np.maximum(np.abs(hyy), 1e-12)
            dmax = SEPARATION_FRACTION * float(np.min(np.abs(hy) * sep))
            dist = min(
                (abs(self.h - v) for v in self.atypicals), default=np.inf
            )
            dmax = min(dmax, STEP_FRACTION * dist) if dist < np.inf else dmax
            if dmax <= 0.0 or not np.isfinite(dmax):
                raise RamificationCollision("step size collapsed to zero")
            dh = target - self.h
            if abs(dh) > dmax:
                dh *= dmax / abs(dh)
            for attempt in range(20):
                ys_new, ok = _newton_y(
                    self.sys, self.xs, self.ys + dh / hy, self.h + dh
                )
                if ok:
                    gap = float(
                        np.max(np.abs(np.diff(np.r_[ys_new, ys_new[0]])))
                    )
                    if gap < 2.0 * self._gap_ref + 1e-9:
                        self.ys = ys_new
                        self.h = self.h + dh
                        self._gap_ref = max(self._gap_ref, self._gap() * 0.5)
                        break
                dh *= 0.5
                if abs(dh) < 1e-15 * (1 + abs(self.h)):
                    raise RamificationCollision(
                        "continuation step shrank below resolution"
                    )
            else:
                raise RamificationCollision("continuation step rejected repeatedly")


def continue_loop(
    sys: HomogeneousHamiltonianSystem,
    loop: FiberLoop,
    path: HPath,
) -> FiberLoop:
    """Parallel transport of a loop along a path in the h-plane."""
    if abs(complex(path.waypoints[0]) - complex(loop.h)) > 1e-12 * (1 + abs(loop.h)):
        raise ValueError("path must start at the loop's base value")
    t = _Transporter(loop, path.atypicals)
    return t.run([complex(w) for w in path.waypoints[1:]])


# ---------------------------------------------------------------------------
# period scans
# ---------------------------------------------------------------------------

def _thread_count():
    env = os.environ.get("ISOCHRON_THREADS", "")
    if env.strip():
        return max(int(env), 1)
    return os.cpu_count() or 1


def period_with_target(sys, h, samples=DEFAULT_SAMPLES, target=QUAD_TARGET,
                       radius_factor=1.0):
    """Origin-loop period with sample doubling until the error target holds."""
    n = samples
    for _ in range(3):
        loop = lift_origin_loop(sys, h, samples=n, radius_factor=radius_factor)
        ps = period(loop)
        if ps.quadrature_error < target:
            return ps
        n *= 2
    raise QuadratureStall(f"quadrature error above {target} after doubling twice")


def period_scan(
    sys: HomogeneousHamiltonianSystem,
    h_grid,
    samples: int = DEFAULT_SAMPLES,
    target: float = QUAD_TARGET,
):
    """Periods on a grid plus the isochronicity statistic max |T - 2 pi i|.

    Per-sample failures are collected as warnings, not raised; the statistic
    uses accepted samples only.
    """
    fsys = sys.to_float()
    results: list[PeriodSample | None] = [None] * len(h_grid)
    warnings: list[str] = []

    def work(idx):
        return idx, period_with_target(fsys, h_grid[idx], samples, target)

    workers = min(_thread_count(), max(len(h_grid), 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(work, i) for i in range(len(h_grid))]
            for fut in futures:
                try:
                    idx, ps = fut.result()
                    results[idx] = ps
                except Exception as exc:  # collected per spec
                    warnings.append(f"{type(exc).__name__}: {exc}")
    else:
        for i in range(len(h_grid)):
            try:
                idx, ps = work(i)
                results[idx] = ps
            except Exception as exc:
                warnings.append(f"h={h_grid[i]}: {type(exc).__name__}: {exc}")
    accepted = [r for r in results if r is not None]
    stat = max(
        (abs(r.value - 2j * np.pi) for r in accepted), default=float("nan")
    )
    return accepted, float(stat), warnings


def grid_avoiding_atypicals(atypicals, radii, seed=0, candidates=24):
    """Complex grid |h| = radii at a common angle staying clear of A_H."""
    rng = np.random.default_rng(seed)
    base = float(rng.uniform(0.0, 2.0 * np.pi))
    vals = [complex(v) for v in atypicals]
    best_angle, best_score = base, -1.0
    for k in range(candidates):
        ang = base + 2.0 * np.pi * k / candidates
        pts = [r * np.exp(1j * ang) for r in radii]
        score = min(
            (abs(p - v) / max(abs(p), 1e-12) for p in pts for v in vals),
            default=1.0,
        )
        if score > best_score:
            best_score, best_angle = score, ang
    return [r * np.exp(1j * best_angle) for r in radii]


# ---------------------------------------------------------------------------
# monodromy lattice checks
# ---------------------------------------------------------------------------

@dataclass
class MonodromyReport:
    case: int
    base: complex
    h_prime: complex
    t_gamma: complex
    t_delta: complex
    shift: complex
    coefficient: complex
    m: int
    residual: float
    ok: bool
    details: dict


_CASE_PATTERNS = {
    1: "a0 a_{n+1} != 0",
    2: "a0 = 0, a1 a_{n+1} != 0 (or the x<->y dual)",
    3: "a0 = a_{n+1} = 0, a1 a_n != 0",
    4: "N1-fold y-factor, 1 < N1 < (n+1)/2, with a_{n+1} = 0, a_n != 0 (or dual)",
    5: "N1-fold y-factor and N2-fold x-factor, both in (1, (n+1)/2)",
}


def _case_of(sys: HomogeneousHamiltonianSystem) -> int | None:
    n = sys.n
    a = sys.a
    nz = [j for j, c in enumerate(a) if not is_zero(c)]
    if not nz:
        return None
    n1 = min(nz)  # y-multiplicity at Px
    n2 = n + 1 - max(nz)  # x-multiplicity at Py
    mixed = any(2 * j < n + 1 for j in nz) and any(2 * j > n + 1 for j in nz)
    if not mixed:
        return None
    if n1 == 0 and n2 == 0:
        return 1
    if (n1 == 1 and n2 == 0) or (n1 == 0 and n2 == 1):
        return 2
    if n1 == 1 and n2 == 1:
        return 3
    big1 = 1 < n1 < (n + 1) / 2
    big2 = 1 < n2 < (n + 1) / 2
    if big1 and big2:
        return 5
    if (big1 and n2 == 1) or (big2 and n1 == 1):
        return 4
    return None


def detect_case(sys) -> int | None:
    """Which Picard-Lefschetz bookkeeping case the coefficient pattern fits."""
    return _case_of(sys)


def monodromy_lattice_check(
    sys: HomogeneousHamiltonianSystem,
    case: int,
    samples: int = DEFAULT_SAMPLES,
    base: complex | None = None,
    h_prime: complex | None = None,
    radius_factor: float = 1.0,
) -> MonodromyReport:
    """Measure the period shift of Delta_rho(delta) against the case lattice.

    delta = Delta_{rho'}(gamma) is produced by continuation around a nonzero
    atypical value; the shift after continuing around 0 must equal -m times
    the measured coefficient (origin period plus the case's saddle and
    infinity-cycle periods).  The integer m is recovered by rounding; a
    nonzero m certifies the necessity contradiction.  Candidate h' values
    are tried until the shift is nonzero.
    """
    fsys = sys.to_float()
    found = _case_of(fsys)
    if found != case:
        raise CaseMismatch(
            f"coefficients match case {found}, not requested case {case}: "
            f"expected {_CASE_PATTERNS[case]}"
        )
    atyp = atypical_values(fsys)
    nonzero = [v for v in atyp if abs(v) > 1e-9]
    if not nonzero:
        raise CaseMismatch("no nonzero atypical value to encircle")
    if base is None:
        scale = min(abs(v) for v in nonzero)
        base = -min(0.3 * scale, 0.02)
        # keep the base direction clear of atypical directions
        angles = sorted(float(np.angle(v)) for v in nonzero)
        base = abs(base) * np.exp(1j * _clear_angle(angles))
    base = complex(base)
    gamma = lift_origin_loop(fsys, base, samples=samples, radius_factor=radius_factor)
    t_gamma = period(gamma).value
    coeff = -_case_coefficient(fsys, case, base, t_gamma, samples)
    candidates = [complex(h_prime)] if h_prime is not None else nonzero
    last = None
    for hp in candidates:
        delta = continue_loop(fsys, gamma, path_around(hp, base, atyp))
        t_delta = period(delta).value
        dd = continue_loop(fsys, delta, circle_path(0.0, base, atyp))
        shift = period(dd).value - t_delta
        m = int(np.round((shift / coeff).real))
        residual = abs(shift / coeff - m)
        report = MonodromyReport(
            case=case,
            base=base,
            h_prime=complex(hp),
            t_gamma=t_gamma,
            t_delta=t_delta,
            shift=shift,
            coefficient=coeff,
            m=m,
            residual=float(residual),
            ok=bool(m != 0 and residual < 1e-6),
            details={"atypicals": [str(v) for v in atyp]},
        )
        if report.ok:
            return report
        last = report
    return last


def _clear_angle(angles):
    if not angles:
        return np.pi
    # pick the angle farthest from every atypical direction
    cands = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    best, best_d = 0.0, -1.0
    for c in cands:
        d = min(
            min(abs(c - a) % (2 * np.pi), 2 * np.pi - abs(c - a) % (2 * np.pi))
            for a in angles
        )
        if d > best_d:
            best, best_d = c, d
    return best


def _case_coefficient(fsys, case, base, t_gamma, samples):
    """Measured lattice coefficient: T_gamma plus saddle/infinity periods."""
    total = t_gamma
    if case in (2, 3, 4):
        saddles = l0_extra_critical_points(fsys)
        if not saddles:
            raise CaseMismatch("case requires extra critical points on L_0")
        x_sad = [s for s in saddles if abs(s.location[1]) < 1e-9]
        y_sad = [s for s in saddles if abs(s.location[0]) < 1e-9]
        groups = [g for g in (x_sad, y_sad) if g]
        for group in groups:
            periods = [
                period(lift_saddle_loop(fsys, base, s, samples=samples)).value
                for s in group
            ]
            spread = max(abs(p - periods[0]) for p in periods)
            if spread > 1e-6:
                raise CaseMismatch(
                    "saddle periods differ; lattice coefficient undefined "
                    f"(spread {spread:.2e})"
                )
            total += periods[0]
    if case in (4, 5):
        for pt in points_at_infinity(fsys):
            n1 = pt.multiplicity
            if (pt.is_px or pt.is_py) and 1 < n1 < (fsys.n + 1) / 2:
                loops = lift_infinity_cycles(fsys, base, pt, samples=samples)
                vals = [period(lp).value for lp in loops]
                # one loop near 2 pi i, the rest near 2 pi i/(N1-1)
                vals.sort(key=lambda v: -abs(v))
                total += vals[0]
                if len(vals) > 1:
                    total += complex(np.mean(vals[1:]))
    return total
