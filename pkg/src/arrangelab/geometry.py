"""Convex obstacles on projective space RP^N.

An obstacle supports membership, epsilon-dilated membership, a great-circle
hit test (does the projective line through two points meet the obstacle?),
and its volume fraction.  Points are unit sphere vectors; every test is
sign-invariant, so either representative of a projective point works.

Two concrete obstacles: a geodesic cap (double cap on the sphere) and the
cone of definite quadrics inside the space of symmetric matrices.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np
from scipy.integrate import quad

from .errors import InvalidInput, Timeout
from .linalg import SymMatrix, min_eigenvalue, packed_length, plane_projection_norm
from . import pencil as _pencil
from .sampling import sample_sphere_batch, sample_sphere_point

# Line tests within this margin of the cap boundary resolve to "hit":
# conservative, and the event has measure zero under uniform sampling.
_BORDER = 1e-9


class Obstacle(ABC):
    """Convex obstacle in RP^N.  Implementations must be sign-invariant."""

    ambient_dim: int

    @abstractmethod
    def contains(self, point):
        ...

    @abstractmethod
    def contains_eps(self, point, eps):
        ...

    @abstractmethod
    def hit_by_line(self, p, q):
        ...

    @abstractmethod
    def volume_fraction(self):
        ...


class CapObstacle(Obstacle):
    """Geodesic cap of angular radius rho < pi/2 about +-center."""

    def __init__(self, center, rho):
        center = np.asarray(center, dtype=float)
        norm = float(np.linalg.norm(center))
        if center.ndim != 1 or center.shape[0] < 2 or norm <= 1e-12:
            raise InvalidInput("cap center must be a nonzero vector in R^(N+1)")
        if not 0.0 < rho < 0.5 * math.pi:
            raise InvalidInput("cap radius must lie in (0, pi/2)")
        self.center = center / norm
        self.rho = float(rho)
        self.cos_rho = math.cos(rho)
        self.ambient_dim = center.shape[0] - 1

    def contains(self, point):
        return cap_contains(self, point)

    def contains_eps(self, point, eps):
        return cap_contains_eps(self, point, eps)

    def hit_by_line(self, p, q):
        return cap_hit_by_line(self, p, q)

    def volume_fraction(self):
        return cap_volume_fraction(self)


class PsdConeObstacle(Obstacle):
    """Projectivized cone of definite m x m quadrics ([Q] = [-Q])."""

    def __init__(self, m):
        if m < 3:
            raise InvalidInput(
                "definite-cone obstacle needs m >= 3 (pencil line test)"
            )
        self.m = m
        self.ambient_dim = packed_length(m) - 1

    def contains(self, point):
        return psd_contains(self, point)

    def contains_eps(self, point, eps):
        # Geodesic dilation of the definite cone has no convenient closed
        # form; only the eps = 0 case is supported.
        if eps == 0.0:
            return psd_contains(self, point)
        raise NotImplementedError("eps-dilation is cap-only")

    def hit_by_line(self, p, q):
        return psd_hit_by_line(self, p, q)

    def volume_fraction(self):
        raise NotImplementedError(
            "no closed form; estimate by Monte Carlo over GOE samples"
        )


# ---------------------------------------------------------------------------
# cap operations


def cap_contains(cap, q):
    """Projective membership: |<q, center>| >= cos(rho)."""
    q = np.asarray(q, dtype=float)
    return abs(float(q @ cap.center)) >= cap.cos_rho


def cap_contains_eps(cap, q, eps):
    """Membership in the eps-dilated cap (radius capped just below pi/2)."""
    if eps < 0.0:
        raise InvalidInput("dilation must be >= 0")
    q = np.asarray(q, dtype=float)
    radius = min(cap.rho + eps, 0.5 * math.pi - 1e-9)
    return abs(float(q @ cap.center)) >= math.cos(radius)


def cap_hit_by_line(cap, p, q):
    """Does the great circle through p, q pass within rho of +-center?"""
    val = plane_projection_norm(p, q, cap.center)
    return val >= cap.cos_rho - _BORDER


def cap_volume_fraction(cap):
    """vol(cap)/vol(RP^N) = int_0^rho sin^(N-1) / int_0^(pi/2) sin^(N-1)."""
    k = cap.ambient_dim - 1
    num, _ = quad(lambda t: math.sin(t) ** k, 0.0, cap.rho, epsabs=1e-12, epsrel=1e-12)
    den, _ = quad(
        lambda t: math.sin(t) ** k, 0.0, 0.5 * math.pi, epsabs=1e-12, epsrel=1e-12
    )
    return num / den


def _cap_hits_from(p, xs, center, cos_rho):
    """Vectorized cap_hit_by_line(p, x) over rows of xs.

    Same Gram-Schmidt projection as plane_projection_norm; rows (anti)parallel
    to p count as hits (the line is undefined, the event has measure zero).
    """
    gp = float(p @ center)
    gx = xs @ center
    dots = xs @ p
    denom_sq = 1.0 - dots * dots
    degenerate = denom_sq <= 1e-18
    safe = np.where(degenerate, 1.0, denom_sq)
    w = (gx - dots * gp) / np.sqrt(safe)
    val = np.minimum(np.hypot(gp, w), 1.0)
    hits = val >= cos_rho - _BORDER
    hits |= degenerate
    return hits


def cap_pairwise_hits(points, center, cos_rho):
    """Pairwise cap_hit_by_line over all point pairs, as two (s, s) masks.

    Gram trick: with D = P P^T and g = P c, the projection norm of the
    center onto span(p_i, p_j) is hypot(g_i, (g_j - D_ij g_i)/sqrt(1-D_ij^2)).
    Returns (hits, degenerate); diagonals are False, and degenerate
    off-diagonal pairs (|D_ij| ~ 1, no spanned plane) are also marked hit.
    """
    d = points @ points.T
    g = points @ center
    denom_sq = 1.0 - d * d
    degenerate = denom_sq <= 1e-18
    safe = np.where(degenerate, 1.0, denom_sq)
    w = (g[None, :] - d * g[:, None]) / np.sqrt(safe)
    val = np.minimum(np.hypot(g[:, None], w), 1.0)
    hits = val >= cos_rho - _BORDER
    hits |= degenerate
    np.fill_diagonal(hits, False)
    np.fill_diagonal(degenerate, False)
    return hits, degenerate


# ---------------------------------------------------------------------------
# definite-cone operations


def psd_contains(obst, q):
    """True iff Q is definite (positive or negative): empty projective zero set."""
    if not isinstance(q, SymMatrix) or q.dim != obst.m:
        raise InvalidInput(f"expected a SymMatrix of dimension {obst.m}")
    return min_eigenvalue(q) > 0.0 or min_eigenvalue(-q) > 0.0


def psd_hit_by_line(obst, q1, q2):
    """Does the pencil through Q1, Q2 meet the definite cone?

    Borderline verdicts resolve to "hit" (conservative, mirrors the cap
    borderline rule); callers that need the distinction use the pencil API.
    """
    verdict = _pencil.pencil_contains_definite(q1, q2)
    return verdict.outcome != _pencil.NO_DEFINITE


# ---------------------------------------------------------------------------
# good cones and coverage


def good_cone_fraction(obst, p, samples, rng):
    """Monte Carlo estimate of the good-cone volume fraction of p.

    The good cone of p is the set of x whose line to p misses the obstacle.
    Returns (fraction, binomial standard error).  Precondition: p outside
    the obstacle.
    """
    if samples < 1:
        raise InvalidInput("need at least one sample")
    if obst.contains(p):
        raise InvalidInput("good cone is defined for points outside the obstacle")
    if isinstance(obst, CapObstacle):
        p = np.asarray(p, dtype=float)
        xs = sample_sphere_batch(rng, obst.ambient_dim, samples)
        hits = _cap_hits_from(p, xs, obst.center, obst.cos_rho)
        good = int(np.count_nonzero(~hits))
    else:
        good = 0
        for _ in range(samples):
            x = sample_sphere_point(rng, obst.ambient_dim)
            if not obst.hit_by_line(p, x):
                good += 1
    frac = good / samples
    stderr = math.sqrt(frac * (1.0 - frac) / samples)
    return frac, stderr


def _draw_outside(obst, eps, rng):
    while True:
        x = sample_sphere_point(rng, obst.ambient_dim)
        if not obst.contains_eps(x, eps):
            return x


def coverage_count(obst, eps, test_grid_size, max_draws, rng):
    """Draws needed until the good cones of the drawn points cover a test set.

    Test points and draws are uniform on RP^N conditioned (by rejection) on
    lying outside the eps-dilated obstacle.  Coverage is certified on the
    finite test set only -- a discretization, not a proof of full coverage.
    Returns the number of draws; raises Timeout past max_draws.
    """
    if test_grid_size < 0 or max_draws < 0:
        raise InvalidInput("sizes must be nonnegative")
    if test_grid_size == 0:
        return 0
    test_pts = np.stack(
        [_draw_outside(obst, eps, rng) for _ in range(test_grid_size)]
    )
    covered = np.zeros(test_grid_size, dtype=bool)
    fast_cap = isinstance(obst, CapObstacle)
    draws = 0
    while draws < max_draws:
        q = _draw_outside(obst, eps, rng)
        draws += 1
        open_idx = np.nonzero(~covered)[0]
        if fast_cap:
            hits = _cap_hits_from(q, test_pts[open_idx], obst.center, obst.cos_rho)
            covered[open_idx[~hits]] = True
        else:
            for i in open_idx:
                if not obst.hit_by_line(q, test_pts[i]):
                    covered[i] = True
        if covered.all():
            return draws
    raise Timeout(f"coverage not reached in {max_draws} draws", draws=max_draws)
