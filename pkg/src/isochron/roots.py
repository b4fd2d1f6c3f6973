"""Simultaneous complex root finding: Aberth-Ehrlich plus Newton polish.

Multiplicities are inferred by clustering.  A base radius of 1e-7 merges
roots that double precision cannot separate; genuinely multiple roots land
further apart (spread ~ eps^(1/m)), so candidate clusters are widened per
multiplicity and confirmed against the derivative values before merging.
"""

from __future__ import annotations

import numpy as np

from .errors import ZeroPolynomial
from .poly import polyval, trim

CLUSTER_RADIUS = 1e-7
ABERTH_TOL = 1e-14
ABERTH_MAX_ITER = 200


def _derivative(coeffs):
    c = np.asarray(coeffs, dtype=complex)
    if c.size <= 1:
        return np.zeros(1, dtype=complex)
    return c[1:] * np.arange(1, c.size)


def aberth_roots(coeffs, rng=None):
    """All roots of a dense ascending-coefficient polynomial (no clustering)."""
    c = trim(coeffs)
    deg = c.size - 1
    if deg == 0:
        if abs(c[0]) == 0:
            raise ZeroPolynomial("all coefficients vanish")
        return np.zeros(0, dtype=complex)
    c = c / c[-1]
    dc = _derivative(c)
    # Cauchy bound initial guesses on a slightly perturbed circle
    radius = 1.0 + float(np.max(np.abs(c[:-1])))
    radius = min(radius, 1.0 + float(np.max(np.abs(c[:-1])) ** (1.0 / deg)) * 2)
    angles = 2 * np.pi * (np.arange(deg) + 0.25) / deg + 0.41
    z = radius ** 0.5 * np.exp(1j * angles)
    for _ in range(ABERTH_MAX_ITER):
        p = polyval(c, z)
        dp = polyval(dc, z)
        ratio = np.where(dp != 0, p / np.where(dp == 0, 1, dp), p)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - ratio * s
        w = np.where(denom != 0, ratio / np.where(denom == 0, 1, denom), ratio)
        z = z - w
        if np.max(np.abs(w)) < ABERTH_TOL * max(1.0, float(np.max(np.abs(z)))):
            break
    # Newton polish
    for _ in range(8):
        p = polyval(c, z)
        dp = polyval(dc, z)
        step = np.where(np.abs(dp) > 0, p / np.where(dp == 0, 1, dp), 0)
        z = z - step
    return z


def _confirm_multiple(coeffs, center, m):
    """Check that center is consistent with an m-fold root of coeffs."""
    c = trim(coeffs)
    deg = c.size - 1
    scale = float(np.max(np.abs(c)))
    d = c
    z = center
    # polish on the (m-1)-th derivative, where the root is simple
    for _ in range(m - 1):
        d = _derivative(d)
    dd = _derivative(d)
    for _ in range(30):
        val = polyval(d, z)
        der = polyval(dd, z)
        if abs(der) == 0:
            break
        step = val / der
        z = z - step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    # all derivatives below order m must vanish to rounding accuracy
    d = c
    grow = max(1.0, abs(z)) ** deg
    for k in range(m):
        if abs(polyval(d, z)) > 1e-7 * scale * grow:
            return None
        d = _derivative(d)
    return z


def univariate_roots(coeffs, cluster_radius=CLUSTER_RADIUS, rng=None):
    """Roots with multiplicities of a dense ascending-coefficient polynomial.

    Returns a list of (root, multiplicity) with multiplicities summing to the
    degree.  Raises ZeroPolynomial when every coefficient vanishes.
    """
    c = trim(coeffs)
    if c.size == 1:
        if abs(c[0]) == 0:
            raise ZeroPolynomial("all coefficients vanish")
        return []
    z = aberth_roots(c, rng=rng)
    deg = z.size
    # union-find clustering, radius widened per candidate multiplicity
    used = np.zeros(deg, dtype=bool)
    order = np.argsort(np.abs(z))
    out = []
    for idx in order:
        if used[idx]:
            continue
        # greedy: gather all unused roots within the widest plausible radius
        group = [idx]
        used[idx] = True
        for m in range(2, deg + 1):
            radius = max(cluster_radius, 3.0 * (1e-13) ** (1.0 / m))
            added = False
            for j in range(deg):
                if not used[j] and abs(z[j] - z[idx]) < radius * max(1.0, abs(z[idx])):
                    group.append(j)
                    used[j] = True
                    added = True
            if not added and len(group) >= m:
                break
        if len(group) == 1:
            out.append((complex(z[idx]), 1))
            continue
        m = len(group)
        center = complex(np.mean(z[group]))
        confirmed = _confirm_multiple(c, center, m)
        if confirmed is not None:
            out.append((complex(confirmed), m))
        else:
            # not a genuine multiple root: fall back to tight clustering
            for j in group:
                used[j] = True
            tight = {}
            for j in group:
                key = None
                for existing in tight:
                    if abs(z[j] - z[existing]) < cluster_radius * max(1.0, abs(z[j])):
                        key = existing
                        break
                tight.setdefault(key if key is not None else j, []).append(j)
            for members in tight.values():
                out.append((complex(np.mean(z[members])), len(members)))
    assert sum(m for _, m in out) == deg
    return out


def poly_from_roots(pairs):
    """Monic ascending coefficients rebuilt from (root, multiplicity) pairs."""
    c = np.array([1.0 + 0j])
    for root, mult in pairs:
        for _ in range(mult):
            c = np.convolve(c, np.array([-root, 1.0 + 0j]))
    return c
