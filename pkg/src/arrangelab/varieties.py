"""Real zero counting: binary forms on RP^1, conic pairs in RP^2, and the
leading-term formula for expected component counts.

Projective conventions throughout: a binary form's zeros live on the circle
RP^1 (affine roots of f(x, 1) plus possibly the point at infinity [1:0]);
the expected projective count for a Kostlan form of degree d is sqrt(d).
The spherical convention counts both antipodes and doubles every figure;
this module never uses it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DegeneratePencil, InvalidInput
from .linalg import SymMatrix
from .sampling import RngState, mix_seed

# fixed stream for the random coordinate frames used in degenerate retries
_FRAME_SEED = 0x5EED


@dataclass(frozen=True)
class ZeroCount:
    """A zero count plus a flag for tolerance-ambiguous instances.

    Flagged counts are excluded from statistics by the experiment harness;
    the flag marks events like a coefficient sitting within a factor 10 of
    a decision threshold, clustered roots that merged, or exhausted
    degenerate-frame retries.
    """

    count: int
    degenerate_flag: bool


def _real_roots_detail(coeffs, merge_tol=1e-8):
    """Distinct real roots of an ascending-coefficient polynomial.

    Returns (roots sorted ascending, merged_any, ambiguous): `merged_any`
    when two raw roots collapsed within merge_tol*(1+|x|), `ambiguous` when
    some root's imaginary part sat within a factor 10 of the realness cut
    1e-7*(1+|Re|).  Constants (after stripping) yield no roots.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
        raise InvalidInput("expected a finite coefficient vector")
    top = float(np.max(np.abs(c)))
    if top == 0.0:
        raise InvalidInput("zero polynomial")
    live = np.nonzero(np.abs(c) > 1e-12 * top)[0]
    deg = int(live.max())
    if deg < 1:
        return np.empty(0), False, False
    try:
        raw = np.roots(c[deg::-1])
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure("companion-matrix QR did not converge") from exc
    re = raw.real
    im = np.abs(raw.imag)
    cut = 1e-7 * (1.0 + np.abs(re))
    real_mask = im <= cut
    with np.errstate(divide="ignore"):
        ratio = im / cut
    ambiguous = bool(np.any((ratio > 0.1) & (ratio <= 10.0)))
    reals = np.sort(re[real_mask])
    out = []
    merged_any = False
    for r in reals:
        if out and r - out[-1] <= merge_tol * (1.0 + abs(r)):
            merged_any = True
            continue
        out.append(float(r))
    return np.array(out), merged_any, ambiguous


def univariate_real_roots(coeffs, tol=1e-8):
    """Distinct real roots of sum_k coeffs[k] x^k (degree >= 1 required).

    Companion-matrix eigenvalues; a root is real iff |Im| <= 1e-7*(1+|Re|),
    and roots within tol*(1+|x|) merge.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
        raise InvalidInput("expected a finite coefficient vector")
    top = float(np.max(np.abs(c))) if c.size else 0.0
    if top == 0.0:
        raise InvalidInput("zero polynomial")
    if int(np.nonzero(np.abs(c) > 1e-12 * top)[0].max()) < 1:
        raise InvalidInput("degree must be >= 1 after stripping")
    roots, _, _ = _real_roots_detail(c, merge_tol=tol)
    return roots


def _projective_roots_rp1(coeffs):
    """Projective zeros of an ascending binary form p = sum c_k x0^k x1^(d-k).

    Returns (angles, flag): angles in [0, pi) for the zero directions
    [cos a : sin a], with [1:0] at angle 0; flag marks near-threshold
    decisions (root at infinity, merged or ambiguous affine roots).
    """
    c = np.asarray(coeffs, dtype=float)
    top = float(np.max(np.abs(c)))
    if top == 0.0:
        raise InvalidInput("zero form")
    thr = 1e-12 * top
    lead = abs(float(c[-1]))
    at_infinity = lead <= thr
    flag = bool(thr * 0.1 <= lead <= thr * 10.0)
    roots, merged, ambiguous = _real_roots_detail(c)
    flag |= merged or ambiguous
    angles = np.arctan2(1.0, roots)  # [x:1] -> (0, pi)
    if at_infinity:
        angles = np.concatenate([[0.0], angles])
    return angles, flag


def projective_zero_count_rp1(f):
    """Number of distinct zeros of a binary form on RP^1."""
    angles, flag = _projective_roots_rp1(f.coeffs)
    return ZeroCount(len(angles), flag)


def arrangement_zeros_detail(forms):
    """(zeros, flagged): distinct points in the union of the forms' zero sets.

    Dedup tolerance 1e-8 in angle, with wraparound at pi.  flagged is True
    when any form's root extraction was ambiguous, so callers can discard
    the sample.
    """
    all_angles = []
    flagged = False
    for f in forms:
        angles, flag = _projective_roots_rp1(f.coeffs)
        flagged = flagged or flag
        all_angles.append(angles)
    if not all_angles:
        return 0, flagged
    merged = np.sort(np.concatenate(all_angles))
    if merged.size == 0:
        return 0, flagged
    tol = 1e-8
    keep = np.ones(merged.size, dtype=bool)
    keep[1:] = np.diff(merged) > tol
    count = int(keep.sum())
    # wraparound: an angle near pi and one near 0 are the same point
    if count > 1 and (merged[0] + math.pi - merged[-1]) <= tol:
        count -= 1
    return count, flagged


def arrangement_b0_rp1(forms):
    """Components of RP^1 minus the union of the forms' zero sets.

    k distinct points cut the circle RP^1 into k arcs; no points (including
    the empty arrangement) leave the whole circle, one component.
    """
    count, _ = arrangement_zeros_detail(forms)
    return max(count, 1)


# ---------------------------------------------------------------------------
# conic pairs


def _random_rotation(dim, attempt):
    rng = RngState(mix_seed(_FRAME_SEED, attempt))
    g = rng.normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diagonal(r))


def _poly_eval_yz(coeffs, y, z):
    """Evaluate an ascending (y,z) binary form at a point."""
    deg = len(coeffs) - 1
    return sum(c * y**k * z ** (deg - k) for k, c in enumerate(coeffs))


def conic_intersection_count(q1, q2):
    """Number of real projective intersection points of two conics in RP^2.

    Sylvester resultant in x: for q_i = A_i x^2 + B_i(y,z) x + C_i(y,z),
    Res = (A1 C2 - A2 C1)^2 - (A1 B2 - A2 B1)(B1 C2 - B2 C1), a binary
    quartic in (y, z).  Each projective root is back-substituted (quadratic
    in x), kept when both forms vanish within 1e-6 of their Frobenius scale,
    and points are deduped at angular tolerance 1e-6.  If the x^2
    coefficient of either form is degenerate the whole computation retries
    in a seeded random orthogonal frame (at most 5 retries, then flagged).
    """
    if not isinstance(q1, SymMatrix) or not isinstance(q2, SymMatrix):
        raise InvalidInput("expected SymMatrix inputs")
    if q1.dim != 3 or q2.dim != 3:
        raise InvalidInput("conic intersection needs 3x3 forms")
    f1 = q1.frobenius_norm()
    f2 = q2.frobenius_norm()
    if f1 == 0.0 or f2 == 0.0:
        raise InvalidInput("forms must be nonzero")
    u1 = q1.entries / f1
    u2 = q2.entries / f2
    if min(np.abs(u1 - u2).max(), np.abs(u1 + u2).max()) <= 1e-12:
        raise DegeneratePencil("the forms are proportional")
    a1_base = q1.to_dense()
    a2_base = q2.to_dense()
    for attempt in range(6):
        if attempt == 0:
            a1, a2 = a1_base, a2_base
        else:
            rot = _random_rotation(3, attempt)
            a1 = rot.T @ a1_base @ rot
            a2 = rot.T @ a2_base @ rot
        result = _conic_count_in_frame(a1, a2, f1, f2)
        if result is not None:
            return result
    return ZeroCount(0, True)


def _conic_count_in_frame(a1, a2, f1, f2):
    """Resultant count in the current frame; None if elimination degenerates."""
    big_a1 = a1[0, 0]
    big_a2 = a2[0, 0]
    if abs(big_a1) < 1e-9 * f1 or abs(big_a2) < 1e-9 * f2:
        return None
    # ascending (y,z) binary forms: index k carries y^k z^(deg-k)
    b1 = np.array([2.0 * a1[0, 2], 2.0 * a1[0, 1]])
    b2 = np.array([2.0 * a2[0, 2], 2.0 * a2[0, 1]])
    c1 = np.array([a1[2, 2], 2.0 * a1[1, 2], a1[1, 1]])
    c2 = np.array([a2[2, 2], 2.0 * a2[1, 2], a2[1, 1]])
    u = big_a1 * c2 - big_a2 * c1
    v = big_a1 * b2 - big_a2 * b1
    w = np.convolve(b1, c2) - np.convolve(b2, c1)
    res = np.convolve(u, u) - np.convolve(v, w)
    res_scale = (f1 * f2) ** 2
    if np.max(np.abs(res)) <= 1e-12 * res_scale:
        # the resultant vanished identically: shared component or bad frame
        return None
    roots, merged, ambiguous = _real_roots_detail(res)
    flag = merged or ambiguous
    thr_inf = 1e-12 * float(np.max(np.abs(res)))
    lead = abs(float(res[-1]))
    flag |= bool(thr_inf * 0.1 <= lead <= thr_inf * 10.0)
    yz = [(float(r), 1.0) for r in roots]
    if lead <= thr_inf:
        yz.append((1.0, 0.0))
    # solve the better-scaled quadratic, verify against both forms
    solve_first = abs(big_a1) / f1 >= abs(big_a2) / f2
    a_solve = big_a1 if solve_first else big_a2
    b_solve = b1 if solve_first else b2
    c_solve = c1 if solve_first else c2
    points = []
    merged_points = False
    for y0, z0 in yz:
        norm_yz = math.hypot(y0, z0)
        y0, z0 = y0 / norm_yz, z0 / norm_yz
        bv = _poly_eval_yz(b_solve, y0, z0)
        cv = _poly_eval_yz(c_solve, y0, z0)
        disc = bv * bv - 4.0 * a_solve * cv
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        for sign in (1.0, -1.0):
            x = (-bv + sign * sq) / (2.0 * a_solve)
            p = np.array([x, y0, z0])
            p /= np.linalg.norm(p)
            v1 = float(p @ a1 @ p)
            v2 = float(p @ a2 @ p)
            ok = abs(v1) <= 1e-6 * f1 and abs(v2) <= 1e-6 * f2
            near1 = 1e-7 * f1 <= abs(v1) <= 1e-5 * f1
            near2 = 1e-7 * f2 <= abs(v2) <= 1e-5 * f2
            flag |= near1 or near2
            if not ok:
                continue
            duplicate = False
            for kept in points:
                if min(
                    np.abs(kept - p).max(), np.abs(kept + p).max()
                ) <= 1e-6:
                    duplicate = True
                    break
            if duplicate:
                merged_points = True
            else:
                points.append(p)
    # distinct transversal intersections never collide; a merge means a
    # near-tangency the tolerances cannot resolve
    flag |= merged_points
    count = len(points)
    if count > 4:
        return ZeroCount(4, True)
    return ZeroCount(count, flag)


def ekss_leading_term(degrees, n):
    """sum over size-n subsets I of sqrt(prod_{i in I} d_i) (projective count)."""
    degrees = list(degrees)
    if n < 1 or len(degrees) < n:
        raise InvalidInput("need at least n degrees and n >= 1")
    if any(d < 1 for d in degrees):
        raise InvalidInput("degrees must be positive")
    return float(
        sum(math.sqrt(math.prod(sub)) for sub in itertools.combinations(degrees, n))
    )
