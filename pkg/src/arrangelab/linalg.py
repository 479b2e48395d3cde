"""Dense symmetric linear algebra for small matrices.

Symmetric matrices are stored packed (upper triangle, row-major over i <= j).
Eigenvalues come from closed forms for m in {2, 3} and a cyclic Jacobi sweep
for m >= 4; both paths avoid any external eigen-solver so the hot loops stay
self-contained and cheap.  Batch variants operate on arrays of packed
matrices and are what the pencil / graph experiments actually call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceFailure, DegeneratePair, InvalidInput

# Relative tolerances get an absolute floor so the zero matrix never divides by 0.
TINY = 1e-300


def packed_length(m):
    return m * (m + 1) // 2


@lru_cache(maxsize=64)
def _triu_indices(m):
    return np.triu_indices(m)


@lru_cache(maxsize=64)
def _diag_positions(m):
    """Boolean mask over the packed layout marking diagonal entries."""
    i, j = _triu_indices(m)
    return i == j


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Real symmetric m x m matrix, packed upper triangle (row-major, i <= j)."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=float)
        if self.dim < 1:
            raise InvalidInput("dimension must be positive")
        if ent.shape != (packed_length(self.dim),):
            raise InvalidInput(
                f"packed length {ent.shape} does not match dim {self.dim}"
            )
        if not np.all(np.isfinite(ent)):
            raise InvalidInput("matrix entries must be finite")
        object.__setattr__(self, "entries", ent)

    @staticmethod
    def from_dense(a):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInput("expected a square matrix")
        # Symmetrize to kill round-off asymmetry; reject genuinely asymmetric input.
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-9 * (1.0 + np.abs(a).max())):
            raise InvalidInput("matrix is not symmetric")
        sym = 0.5 * (a + a.T)
        i, j = _triu_indices(a.shape[0])
        return SymMatrix(a.shape[0], sym[i, j])

    @staticmethod
    def diagonal(values):
        values = np.asarray(values, dtype=float)
        m = values.shape[0]
        ent = np.zeros(packed_length(m))
        ent[_diag_positions(m)] = values
        return SymMatrix(m, ent)

    @staticmethod
    def identity(m):
        return SymMatrix.diagonal(np.ones(m))

    def to_dense(self):
        a = np.empty((self.dim, self.dim))
        i, j = _triu_indices(self.dim)
        a[i, j] = self.entries
        a[j, i] = self.entries
        return a

    def frobenius_norm(self):
        # ||Q||_F^2 = sum diag^2 + 2 sum_{i<j} offdiag^2
        w = np.where(_diag_positions(self.dim), 1.0, 2.0)
        return math.sqrt(float(np.dot(w * self.entries, self.entries)))

    def quadratic_form(self, x):
        """q(x) = <x, Qx>."""
        x = np.asarray(x, dtype=float)
        return float(x @ self.to_dense() @ x)

    def scaled(self, a):
        return SymMatrix(self.dim, float(a) * self.entries)

    def __neg__(self):
        return SymMatrix(self.dim, -self.entries)


def pack_dense_batch(a):
    """(B, m, m) dense -> (B, L) packed."""
    m = a.shape[-1]
    i, j = _triu_indices(m)
    return a[..., i, j]


def unpack_batch(packed, m):
    """(B, L) packed -> (B, m, m) dense."""
    packed = np.asarray(packed, dtype=float)
    i, j = _triu_indices(m)
    a = np.empty(packed.shape[:-1] + (m, m))
    a[..., i, j] = packed
    a[..., j, i] = packed
    return a


def frobenius_batch(packed, m):
    w = np.where(_diag_positions(m), 1.0, 2.0)
    return np.sqrt(np.einsum("...k,...k->...", w * packed, packed))


# ---------------------------------------------------------------------------
# eigenvalues


def _eig2_packed(packed):
    """Eigenvalues (ascending) of packed 2x2 symmetric matrices, shape (..., 2)."""
    a = packed[..., 0]
    b = packed[..., 1]
    d = packed[..., 2]
    half_tr = 0.5 * (a + d)
    r = np.hypot(0.5 * (a - d), b)
    return np.stack([half_tr - r, half_tr + r], axis=-1)


def _eig3_packed(packed):
    """Eigenvalues (ascending) of packed 3x3 symmetric matrices, shape (..., 3).

    Trigonometric solution of the characteristic cubic: with q = tr/3 and
    p = sqrt(sum((A - qI)^2)/6), the eigenvalues are q + 2p cos(phi + 2k pi/3)
    where 3*phi = arccos(det((A - qI)/p) / 2).
    """
    a00 = packed[..., 0]
    a01 = packed[..., 1]
    a02 = packed[..., 2]
    a11 = packed[..., 3]
    a12 = packed[..., 4]
    a22 = packed[..., 5]
    q = (a00 + a11 + a22) / 3.0
    b00 = a00 - q
    b11 = a11 - q
    b22 = a22 - q
    p1 = a01 * a01 + a02 * a02 + a12 * a12
    p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    safe = np.where(p > 0.0, p, 1.0)
    c00 = b00 / safe
    c11 = b11 / safe
    c22 = b22 / safe
    c01 = a01 / safe
    c02 = a02 / safe
    c12 = a12 / safe
    det_b = (
        c00 * (c11 * c22 - c12 * c12)
        - c01 * (c01 * c22 - c12 * c02)
        + c02 * (c01 * c12 - c11 * c02)
    )
    # In exact arithmetic det(B)/2 lies in [-1, 1]; round-off can leak outside.
    r = np.clip(det_b / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    two_pi_3 = 2.0 * np.pi / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + two_pi_3)
    mid = 3.0 * q - hi - lo
    lo = np.where(p2 > 0.0, lo, q)
    mid = np.where(p2 > 0.0, mid, q)
    hi = np.where(p2 > 0.0, hi, q)
    return np.stack([lo, mid, hi], axis=-1)


def _min_eig3_packed(packed):
    """Smallest eigenvalue only; same formula as _eig3_packed without the sort."""
    a00 = packed[..., 0]
    a01 = packed[..., 1]
    a02 = packed[..., 2]
    a11 = packed[..., 3]
    a12 = packed[..., 4]
    a22 = packed[..., 5]
    q = (a00 + a11 + a22) / 3.0
    b00 = a00 - q
    b11 = a11 - q
    b22 = a22 - q
    p1 = a01 * a01 + a02 * a02 + a12 * a12
    p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    safe = np.where(p > 0.0, p, 1.0)
    c00 = b00 / safe
    c11 = b11 / safe
    c22 = b22 / safe
    c01 = a01 / safe
    c02 = a02 / safe
    c12 = a12 / safe
    det_b = (
        c00 * (c11 * c22 - c12 * c12)
        - c01 * (c01 * c22 - c12 * c02)
        + c02 * (c01 * c12 - c11 * c02)
    )
    r = np.clip(det_b / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    return np.where(p2 > 0.0, lo, q)


def _jacobi_eigenvalues(a, max_sweeps=50):
    """Cyclic Jacobi on a dense symmetric matrix (destroys `a`); ascending values.

    Terminates when the off-diagonal Frobenius norm drops below 1e-12 * ||A||_F;
    raises ConvergenceFailure after `max_sweeps` full sweeps.
    """
    m = a.shape[0]
    scale = math.sqrt(float(np.sum(a * a)))
    if scale == 0.0:
        return np.zeros(m)
    target = 1e-12 * scale
    others = np.empty(m - 2, dtype=int) if m > 2 else np.empty(0, dtype=int)
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= target:
            return np.sort(np.diagonal(a).copy())
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                # smaller-magnitude root of t^2 + 2 theta t - 1 = 0
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                app = a[p, p]
                aqq = a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                k = 0
                for r in range(m):
                    if r != p and r != q:
                        others[k] = r
                        k += 1
                arp = a[others, p].copy()
                arq = a[others, q].copy()
                a[others, p] = c * arp - s * arq
                a[p, others] = a[others, p]
                a[others, q] = s * arp + c * arq
                a[q, others] = a[others, q]
    off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
    if off <= target:
        return np.sort(np.diagonal(a).copy())
    raise ConvergenceFailure(
        f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})"
    )


def sym_eigenvalues(q):
    """All eigenvalues of a SymMatrix in nondecreasing order."""
    if not isinstance(q, SymMatrix):
        q = SymMatrix.from_dense(q)
    m = q.dim
    if m == 1:
        return q.entries.copy()
    if m == 2:
        return _eig2_packed(q.entries)
    if m == 3:
        return _eig3_packed(q.entries)
    return _jacobi_eigenvalues(q.to_dense())


def min_eigenvalue(q):
    """Smallest eigenvalue; first element of sym_eigenvalues."""
    return float(sym_eigenvalues(q)[0])


def min_eigenvalues_batch(packed, m):
    """Smallest eigenvalue for each row of a (B, L) packed batch."""
    packed = np.asarray(packed, dtype=float)
    if m == 1:
        return packed[..., 0].copy()
    if m == 2:
        return _eig2_packed(packed)[..., 0]
    if m == 3:
        return _min_eig3_packed(packed)
    flat = packed.reshape(-1, packed.shape[-1])
    out = np.empty(flat.shape[0])
    for k in range(flat.shape[0]):
        out[k] = _jacobi_eigenvalues(unpack_batch(flat[k], m))[0]
    return out.reshape(packed.shape[:-1])


def _pivots_all_positive(a):
    """Vectorized Sylvester test: True where every elimination pivot is > 0.

    `a` is a dense (B, m, m) batch and is destroyed.  For symmetric matrices
    the k-th pivot equals det_k/det_{k-1}, so all pivots positive <=> positive
    definite.  Rows that already failed keep eliminating with a dummy pivot;
    their flag is latched off.
    """
    m = a.shape[-1]
    ok = np.ones(a.shape[0], dtype=bool)
    for k in range(m):
        piv = a[:, k, k]
        ok &= piv > 0.0
        if k == m - 1:
            break
        safe = np.where(piv > 0.0, piv, 1.0)
        col = a[:, k + 1 :, k] / safe[:, None]
        a[:, k + 1 :, k + 1 :] -= col[:, :, None] * a[:, k, None, k + 1 :]
    return ok


def definite_batch(packed, m):
    """(is_positive_definite, is_negative_definite) flags for a packed batch."""
    packed = np.asarray(packed, dtype=float)
    flat = packed.reshape(-1, packed.shape[-1])
    dense = unpack_batch(flat, m)
    is_pd = _pivots_all_positive(dense.copy())
    is_nd = _pivots_all_positive(-dense)
    shape = packed.shape[:-1]
    return is_pd.reshape(shape), is_nd.reshape(shape)


# ---------------------------------------------------------------------------
# plane projections


def _check_unit(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInput(f"{name} must be a vector")
    if abs(float(x @ x) - 1.0) > 1e-9:
        raise InvalidInput(f"{name} must have unit norm")
    return x


def plane_projection_norm(u, v, c):
    """Norm of the projection of unit vector c onto span(u, v).

    Gram-Schmidt on (u, v); equals the cosine of the angular distance from c
    to the great circle through u and v.  Result clamped to [0, 1].
    """
    u = _check_unit(u, "u")
    v = _check_unit(v, "v")
    c = _check_unit(c, "c")
    w = v - float(u @ v) * u
    nw = math.sqrt(float(w @ w))
    if nw <= 1e-9:
        raise DegeneratePair("u and v are collinear; no unique plane")
    vp = w / nw
    val = math.hypot(float(c @ u), float(c @ vp))
    return min(val, 1.0)
