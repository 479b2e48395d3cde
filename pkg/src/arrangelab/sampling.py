"""Seeded random sampling: sphere points, Kostlan polynomials, GOE matrices.

Determinism contract: all randomness flows through RngState, which wraps
numpy's PCG64 bit generator; Gaussians use its ziggurat standard_normal.
That pair is the documented transform for this package -- same seed, same
parameters, same stream, on any machine running the same numpy major line.
Parallel trials never share a stream: trial i uses the derived seed
mix_seed(master_seed, i) (a SplitMix64-style finalizer), so execution order
cannot change any output.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .linalg import SymMatrix, _diag_positions, packed_length

_MASK64 = (1 << 64) - 1


def mix_seed(seed, index):
    """Derive an independent 64-bit stream seed for a sub-stream `index`.

    SplitMix64 finalizer applied to seed + (index+1) * golden-gamma.  Bijective
    in `seed` for fixed index, well-scrambled in both arguments.
    """
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


class RngState:
    """Deterministic random stream (PCG64).  Single-owner: do not share across threads."""

    def __init__(self, seed):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, size=None):
        return self._gen.random(size)

    def derive(self, index):
        """Independent child stream; used for per-trial seeds."""
        return RngState(mix_seed(self.seed, index))


# ---------------------------------------------------------------------------
# sphere / projective points


def sample_sphere_point(rng, n_dim):
    """Uniform point on S^N (N = n_dim): normalized iid standard Gaussians."""
    if n_dim < 1:
        raise InvalidInput("sphere dimension must be >= 1")
    while True:
        x = rng.normal(n_dim + 1)
        norm = math.sqrt(float(x @ x))
        if norm > 1e-12:  # all-zeros draw has probability 0
            return x / norm


def sample_sphere_batch(rng, n_dim, count):
    """(count, N+1) array of independent uniform points on S^N."""
    if n_dim < 1:
        raise InvalidInput("sphere dimension must be >= 1")
    x = rng.normal((count, n_dim + 1))
    norms = np.linalg.norm(x, axis=1)
    bad = norms <= 1e-12
    while np.any(bad):
        x[bad] = rng.normal((int(bad.sum()), n_dim + 1))
        norms[bad] = np.linalg.norm(x[bad], axis=1)
        bad = norms <= 1e-12
    return x / norms[:, None]

def canonical_rep(x):
    """Canonical projective representative: first nonzero coordinate positive."""
    x = np.asarray(x, dtype=float)
    for v in x:
        if v != 0.0:
            return x if v > 0.0 else -x
    return x


# ---------------------------------------------------------------------------
# Kostlan polynomials


@dataclass(frozen=True)
class KostlanPoly:
    """Homogeneous polynomial in n+1 variables with coefficients keyed by multi-index."""

    n: int
    d: int
    coeffs: dict

    def __post_init__(self):
        expected = math.comb(self.n + self.d, self.n)
        if len(self.coeffs) != expected:
            raise InvalidInput(
                f"expected {expected} coefficients, got {len(self.coeffs)}"
            )


@dataclass(frozen=True)
class BinaryForm:
    """p(x0, x1) = sum_k c_k x0^k x1^(d-k); coeffs[k] = c_k."""

    d: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.d + 1,):
            raise InvalidInput("coefficient length must be d+1")
        if not np.all(np.isfinite(c)):
            raise InvalidInput("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)


def multi_indices(n, d):
    """All (a0..an) with sum d, colexicographic in the tail (a1..an)."""
    tails = [t for t in itertools.product(range(d + 1), repeat=n) if sum(t) <= d]
    tails.sort(key=lambda t: t[::-1])
    return [(d - sum(t),) + t for t in tails]


def kostlan_variance(alpha):
    """Multinomial coefficient d!/(a0! ... an!) for multi-index alpha."""
    d = sum(alpha)
    denom = 1
    for a in alpha:
        denom *= math.factorial(a)
    return math.factorial(d) // denom


def sample_kostlan(rng, n, d):
    """Kostlan random polynomial: coefficient at alpha ~ N(0, d!/prod(alpha!))."""
    if n < 1 or d < 1:
        raise InvalidInput("need n >= 1 and d >= 1")
    indices = multi_indices(n, d)
    sd = np.sqrt([kostlan_variance(a) for a in indices])
    z = rng.normal(len(indices))
    return KostlanPoly(n, d, dict(zip(indices, sd * z)))


def binary_form(poly):
    """Dense view of a KostlanPoly with n = 1."""
    if poly.n != 1:
        raise InvalidInput("binary form requires n = 1")
    c = np.zeros(poly.d + 1)
    for (a0, _a1), val in poly.coeffs.items():
        c[a0] = val
    return BinaryForm(poly.d, c)


# ---------------------------------------------------------------------------
# GOE matrices


def sample_goe(rng, m):
    """GOE symmetric matrix: diag ~ N(0,1), offdiag ~ N(0,1/2), all independent.

    Normalization chosen so q(x) = <x, Qx> is a Kostlan quadric: the
    coefficient of x_i^2 is Q_ii (variance 1) and of x_i x_j is 2 Q_ij
    (variance 2), matching the degree-2 multinomial variances.
    """
    if m < 1:
        raise InvalidInput("matrix dimension must be >= 1")
    return SymMatrix(m, _goe_packed(rng, m, None))


def sample_goe_batch(rng, m, count):
    """(count, L) packed batch of independent GOE matrices."""
    if m < 1:
        raise InvalidInput("matrix dimension must be >= 1")
    return _goe_packed(rng, m, count)


def _goe_packed(rng, m, count):
    length = packed_length(m)
    scale = np.where(_diag_positions(m), 1.0, math.sqrt(0.5))
    if count is None:
        return scale * rng.normal(length)
    return scale * rng.normal((count, length))
