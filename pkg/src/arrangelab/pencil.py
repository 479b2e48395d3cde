"""Definiteness of matrix pencils (the edge test for quadric intersection).

Two quadrics in >= 3 variables have a common projective zero exactly when no
matrix in their pencil {l1*Q1 + l2*Q2} is definite.  lambda_min is concave
and positively homogeneous on the space of symmetric matrices, so on each of
the four chords {(1-t)A + tB : t in [0,1]}, (A, B) in {(+-Q1, +-Q2)}, the map
t -> lambda_min is concave and golden-section search maximizes it exactly up
to tolerance; the four chords' positive hulls cover every pencil direction.

The scalar entry point is pencil_contains_definite; quadric graphs call
pencil_outcomes_batch, which screens whole batches with a concavity secant
bound and only refines the rare near-tangent pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, UnsupportedDimension
from .linalg import (
    TINY,
    SymMatrix,
    _min_eig3_packed,
    frobenius_batch,
    min_eigenvalues_batch,
)
from .sampling import RngState, mix_seed

CONTAINS_DEFINITE = "contains-definite"
NO_DEFINITE = "no-definite"
BORDERLINE = "borderline"

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_GOLDEN_INTERVAL = 1e-10
_GOLDEN_MAX_ITER = 200
# golden section shrinks by 1/phi per iteration; 48 steps take 1 below 1e-10
_GOLDEN_FIXED_ITERS = 48

# Chord sign pairs: (s1, s2) with chord (1-t)*s1*Q1 + t*s2*Q2.
_CHORDS = ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0))

_ORACLE_SEED = 0xC0FFEE


@dataclass(frozen=True)
class PencilVerdict:
    """Outcome of scanning a pencil for a definite member.

    max_value is the best lambda_min over the four unit-l1 chords; for
    NO_DEFINITE it is a certified upper bound (<= -tol) for the whole pencil.
    witness_angle/witness_value are set only for CONTAINS_DEFINITE and refer
    to the unit direction cos(theta)*Q1 + sin(theta)*Q2.
    """

    outcome: str
    max_value: float
    witness_angle: float | None
    witness_value: float | None
    iterations: int

    @property
    def contains_definite(self):
        return self.outcome == CONTAINS_DEFINITE

    @property
    def no_definite(self):
        return self.outcome == NO_DEFINITE

    @property
    def borderline(self):
        return self.outcome == BORDERLINE


def _check_pair(q1, q2):
    if not isinstance(q1, SymMatrix) or not isinstance(q2, SymMatrix):
        raise InvalidInput("expected SymMatrix inputs")
    if q1.dim != q2.dim:
        raise InvalidInput("pencil needs matrices of equal dimension")
    if q1.dim < 3:
        raise UnsupportedDimension(
            "pencil definiteness requires m >= 3 (quadrics in >= 3 variables)"
        )
    f1 = q1.frobenius_norm()
    f2 = q2.frobenius_norm()
    if f1 == 0.0 or f2 == 0.0:
        raise InvalidInput("pencil endpoints must be nonzero")
    return f1, f2


def pencil_contains_definite(q1, q2, tol=None):
    """Does the pencil of q1, q2 contain a definite matrix?

    Golden-section maximization of lambda_min along each of the four chords
    (interval < 1e-10 or 200 iterations per chord; endpoints evaluated
    explicitly).  Verdict compares the best value against +-tol, default
    tol = 1e-9 * max(||Q1||_F, ||Q2||_F); values inside the band are
    reported as BORDERLINE rather than forced to a boolean.
    """
    f1, f2 = _check_pair(q1, q2)
    if tol is None:
        tol = 1e-9 * max(f1, f2)
    m = q1.dim
    p1 = q1.entries
    p2 = q2.entries

    def eig_min(packed):
        return float(min_eigenvalues_batch(packed[None, :], m)[0])

    e_q1 = eig_min(p1)
    e_nq1 = eig_min(-p1)
    e_q2 = eig_min(p2)
    e_nq2 = eig_min(-p2)
    endpoints = (
        (e_q1, 0.0),
        (e_nq1, math.pi),
        (e_q2, 0.5 * math.pi),
        (e_nq2, -0.5 * math.pi),
    )
    best_g = -math.inf
    best_dir = None
    best_r = 1.0
    for val, ang in endpoints:
        if val > best_g:
            best_g = val
            best_dir = ang
    iterations = 0
    if best_g > tol:
        return PencilVerdict(CONTAINS_DEFINITE, best_g, best_dir, best_g, 0)

    endpoint_value = {1.0: (e_q1, e_q2), -1.0: (e_nq1, e_nq2)}
    for s1, s2 in _CHORDS:
        a6 = s1 * p1
        b6 = s2 * p2

        def g(t):
            return eig_min((1.0 - t) * a6 + t * b6)

        chord_best = endpoint_value[s1][0]
        chord_t = 0.0
        if endpoint_value[s2][1] > chord_best:
            chord_best = endpoint_value[s2][1]
            chord_t = 1.0
        lo, hi = 0.0, 1.0
        c = hi - _INV_PHI * (hi - lo)
        d = lo + _INV_PHI * (hi - lo)
        fc = g(c)
        fd = g(d)
        iterations += 2
        for t_val, f_val in ((c, fc), (d, fd)):
            if f_val > chord_best:
                chord_best = f_val
                chord_t = t_val
        it = 2
        while hi - lo > _GOLDEN_INTERVAL and it < _GOLDEN_MAX_ITER:
            if fc >= fd:
                hi, d, fd = d, c, fc
                c = hi - _INV_PHI * (hi - lo)
                fc = g(c)
                probe_t, probe_f = c, fc
            else:
                lo, c, fc = c, d, fd
                d = lo + _INV_PHI * (hi - lo)
                fd = g(d)
                probe_t, probe_f = d, fd
            it += 1
            iterations += 1
            if probe_f > chord_best:
                chord_best = probe_f
                chord_t = probe_t
            if probe_f > tol:
                break
        if chord_best > best_g:
            best_g = chord_best
            a = s1 * (1.0 - chord_t)
            b = s2 * chord_t
            best_dir = math.atan2(b, a)
            best_r = math.hypot(a, b)
        if best_g > tol:
            # positively homogeneous: rescale to the unit pencil direction
            witness = best_g / best_r
            return PencilVerdict(
                CONTAINS_DEFINITE, best_g, best_dir, witness, iterations
            )
    if best_g <= -tol:
        return PencilVerdict(NO_DEFINITE, best_g, None, None, iterations)
    return PencilVerdict(BORDERLINE, best_g, None, None, iterations)


# ---------------------------------------------------------------------------
# independent oracle


def common_zero_oracle(q1, q2, restarts=50, seed=_ORACLE_SEED):
    """Search for a common projective zero of two quadratic forms.

    Projected gradient descent on f(x) = <x,Q1 x>^2 + <x,Q2 x>^2 over the
    unit sphere, `restarts` random starts, 500 steps each, initial step
    0.1/||(Q1,Q2)||_F, halved on non-decrease and grown 1.25x on decrease
    (growth keeps progress geometric in the flat quartic basins this f
    develops at degenerate zeros).  The best surviving candidates then get a
    Gauss-Newton polish on the residual (q1(x), q2(x)), which converges where
    plain descent crawls: zeros where the two quadrics meet at a shallow
    angle make f an ill-conditioned valley.  Returns True iff the best f
    falls below 1e-8 * (||Q1||_F^2 + ||Q2||_F^2).  One-sided: True is
    certified by the found point, False is high-confidence only.
    """
    f1, f2 = _check_pair(q1, q2)
    m = q1.dim
    a1 = q1.to_dense()
    a2 = q2.to_dense()
    threshold = 1e-8 * (f1 * f1 + f2 * f2)
    step0 = 0.1 / math.sqrt(f1 * f1 + f2 * f2)
    rng = RngState(mix_seed(seed, restarts))
    x = rng.normal((restarts, m))
    x /= np.maximum(np.linalg.norm(x, axis=1, keepdims=True), 1e-300)
    steps = np.full(restarts, step0)

    def f_of(xs):
        v1 = np.einsum("ij,ij->i", xs @ a1, xs)
        v2 = np.einsum("ij,ij->i", xs @ a2, xs)
        return v1 * v1 + v2 * v2, v1, v2

    fx, v1, v2 = f_of(x)
    for _ in range(500):
        if fx.min() <= threshold:
            return True
        grad = 4.0 * (v1[:, None] * (x @ a1) + v2[:, None] * (x @ a2))
        cand = x - steps[:, None] * grad
        cand /= np.maximum(np.linalg.norm(cand, axis=1, keepdims=True), 1e-300)
        fc, c1, c2 = f_of(cand)
        improved = fc < fx
        x[improved] = cand[improved]
        fx[improved] = fc[improved]
        v1[improved] = c1[improved]
        v2[improved] = c2[improved]
        steps[improved] *= 1.25
        steps[~improved] *= 0.5
        if np.all(steps < 1e-30):
            break
    if fx.min() <= threshold:
        return True
    order = np.argsort(fx)[: min(8, restarts)]
    for idx in order:
        if _polish_candidate(x[idx], a1, a2, threshold):
            return True
    return False


def _polish_candidate(x0, a1, a2, threshold, iters=40):
    """Gauss-Newton on r(x) = (q1(x), q2(x)) constrained to the sphere.

    Steps solve the 2x2 normal equations of the 2 x m Jacobian, projected to
    the tangent space, with backtracking when f fails to decrease.  True iff
    the polished point certifies f <= threshold.
    """
    x = np.array(x0, dtype=float)
    ridge = 1e-14
    f_best = None
    for _ in range(iters):
        g1 = x @ a1
        g2 = x @ a2
        v = np.array([x @ g1, x @ g2])
        f = float(v @ v)
        if f <= threshold:
            return True
        if f_best is not None and f >= f_best:
            break
        f_best = f
        jac = 2.0 * np.stack([g1, g2])
        gram = jac @ jac.T
        gram[0, 0] += ridge * (1.0 + gram[0, 0])
        gram[1, 1] += ridge * (1.0 + gram[1, 1])
        try:
            coef = np.linalg.solve(gram, v)
        except np.linalg.LinAlgError:
            break
        delta = -jac.T @ coef
        delta -= (delta @ x) * x
        scale = 1.0
        for _ in range(20):
            cand = x + scale * delta
            cand /= max(np.linalg.norm(cand), TINY)
            w1 = cand @ a1 @ cand
            w2 = cand @ a2 @ cand
            if w1 * w1 + w2 * w2 < f:
                x = cand
                break
            scale *= 0.5
        else:
            break
    return False


def calabi_check(q1, q2, restarts=50):
    """Cross-validate the pencil test against the common-zero oracle.

    Consistent iff exactly one of {pencil contains definite, oracle finds a
    common zero} holds; Borderline pencil verdicts pass through unresolved.

    A pencil that contains a definite matrix with margin w forces
    f = q1^2 + q2^2 >= w^2 on the whole sphere, so the oracle can report a
    sub-threshold "zero" alongside a genuine definite witness only when
    w^2 is at or below the oracle's acceptance threshold.  That collision
    is a resolution limit, not a contradiction, and is returned Borderline;
    Inconsistent is reserved for disagreements neither tolerance explains.
    """
    verdict = pencil_contains_definite(q1, q2)
    if verdict.borderline:
        return BORDERLINE
    has_zero = common_zero_oracle(q1, q2, restarts=restarts)
    if verdict.contains_definite != has_zero:
        return CONSISTENT
    if verdict.contains_definite and has_zero:
        f_thresh = 1e-8 * (
            q1.frobenius_norm() ** 2 + q2.frobenius_norm() ** 2
        )
        if verdict.max_value <= math.sqrt(f_thresh):
            return BORDERLINE
    return INCONSISTENT


# ---------------------------------------------------------------------------
# batch kernel

CODE_NO_DEFINITE = 0
CODE_CONTAINS = 1
CODE_BORDERLINE = 2


def pencil_outcomes_batch(p1, p2, m, tol=None, coarse_k=9):
    """Pencil outcome codes for a batch of packed pairs.

    p1, p2: (B, L) packed symmetric matrices, m >= 3.  Returns
    (codes, best) where codes[i] is CODE_NO_DEFINITE / CODE_CONTAINS /
    CODE_BORDERLINE and best[i] is the sharpest lambda_min value found
    (chord normalization; for CODE_NO_DEFINITE a certified upper bound).

    Stage 1 probes each chord on a uniform grid and certifies most pairs via
    the concave secant bound; stage 2 runs lockstep golden-section on the
    survivors only.  Verdicts match pencil_contains_definite.
    """
    p1 = np.atleast_2d(np.asarray(p1, dtype=float))
    p2 = np.atleast_2d(np.asarray(p2, dtype=float))
    if p1.shape != p2.shape:
        raise InvalidInput("packed batches must have equal shape")
    if m < 3:
        raise UnsupportedDimension("pencil definiteness requires m >= 3")
    n_pairs = p1.shape[0]
    f1 = frobenius_batch(p1, m)
    f2 = frobenius_batch(p2, m)
    if np.any(f1 == 0.0) or np.any(f2 == 0.0):
        raise InvalidInput("pencil endpoints must be nonzero")
    if tol is None:
        tol = 1e-9 * np.maximum(f1, f2)
    else:
        tol = np.broadcast_to(np.asarray(tol, dtype=float), (n_pairs,)).copy()

    if m == 3:
        eig_min = _min_eig3_packed
    else:

        def eig_min(packed):
            return min_eigenvalues_batch(packed, m)

    ts = np.linspace(0.0, 1.0, coarse_k)
    contains = np.zeros(n_pairs, dtype=bool)
    best = np.full(n_pairs, -np.inf)
    ub_all = np.full(n_pairs, -np.inf)
    g_peak = np.full(n_pairs, -np.inf)
    for s1, s2 in _CHORDS:
        g = np.empty((n_pairs, coarse_k))
        for k, t in enumerate(ts):
            combo = (s1 * (1.0 - t)) * p1 + (s2 * t) * p2
            g[:, k] = eig_min(combo)
        contains |= np.any(g > tol[:, None], axis=1)
        np.maximum(g_peak, g.max(axis=1), out=g_peak)
        np.maximum(ub_all, _chord_upper_bound(g, ts), out=ub_all)
    codes = np.full(n_pairs, 255, dtype=np.uint8)
    codes[contains] = CODE_CONTAINS
    best[contains] = g_peak[contains]
    certified = (~contains) & (ub_all <= -tol)
    codes[certified] = CODE_NO_DEFINITE
    best[certified] = ub_all[certified]

    unresolved = np.nonzero(codes == 255)[0]
    if unresolved.size:
        refined = _refine_chords(p1[unresolved], p2[unresolved], eig_min)
        g_star = np.maximum(refined, g_peak[unresolved])
        best[unresolved] = g_star
        sub_tol = tol[unresolved]
        codes[unresolved] = np.where(
            g_star > sub_tol,
            CODE_CONTAINS,
            np.where(g_star <= -sub_tol, CODE_NO_DEFINITE, CODE_BORDERLINE),
        ).astype(np.uint8)
    return codes, best


def _chord_upper_bound(g, ts):
    """Certified upper bound for a concave function sampled at ts, per row.

    On the interval between consecutive samples the function lies below the
    left-neighbor secant extended right and below the right-neighbor secant
    extended left; the bound is the max of their pointwise min, never less
    than the bracketing sample values.
    """
    dt = ts[1] - ts[0]
    slopes = (g[:, 1:] - g[:, :-1]) / dt  # (B, K-1)
    big = 1e30
    rows = g.shape[0]
    a = np.concatenate([np.full((rows, 1), big), slopes[:, :-1]], axis=1)
    b = np.concatenate([slopes[:, 1:], np.full((rows, 1), -big)], axis=1)
    gl = g[:, :-1]
    gr = g[:, 1:]
    tl = ts[:-1][None, :]
    tr = ts[1:][None, :]
    denom = a - b
    safe = np.where(denom > 0.0, denom, 1.0)
    t_star = (gr - gl + a * tl - b * tr) / safe
    t_star = np.where(denom > 0.0, t_star, tl)
    tc = np.clip(t_star, tl, tr)
    cross = np.minimum(gl + a * (tc - tl), gr + b * (tc - tr))
    interval_ub = np.maximum(np.maximum(gl, gr), cross)
    return interval_ub.max(axis=1)


def _refine_chords(p1, p2, eig_min):
    """Lockstep golden-section max of lambda_min over all four chords.

    All rows share the bracketing schedule (the interval width is a function
    of the iteration count alone), so one fused evaluation per iteration
    serves the whole batch.  Returns the per-pair best value found.
    """
    n = p1.shape[0]
    best = np.full(n, -np.inf)
    for s1, s2 in _CHORDS:
        a6 = s1 * p1
        b6 = s2 * p2

        def g_at(t):
            return eig_min((1.0 - t)[:, None] * a6 + t[:, None] * b6)

        lo = np.zeros(n)
        hi = np.ones(n)
        c = hi - _INV_PHI * (hi - lo)
        d = lo + _INV_PHI * (hi - lo)
        fc = g_at(c)
        fd = g_at(d)
        for _ in range(_GOLDEN_FIXED_ITERS):
            take_left = fc >= fd
            hi = np.where(take_left, d, hi)
            lo = np.where(take_left, lo, c)
            width = hi - lo
            c_new = np.where(take_left, hi - _INV_PHI * width, d)
            d_new = np.where(take_left, c, lo + _INV_PHI * width)
            probe_t = np.where(take_left, c_new, d_new)
            probe_f = g_at(probe_t)
            fc, fd = (
                np.where(take_left, probe_f, fd),
                np.where(take_left, fc, probe_f),
            )
            c, d = c_new, d_new
        np.maximum(best, np.maximum(fc, fd), out=best)
    return best
