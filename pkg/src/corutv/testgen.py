"""Seeded generators for the synthetic test matrices.

Each generator draws its random factors from consecutive sub-streams of a
single :class:`RngSeed` (``stream``, ``stream + 1``, ...), so one seed fixes
the whole matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import ParameterError, RngSeed, Xoshiro256pp, gaussian, householder_qr, svd

__all__ = [
    "TestMatrixSpec",
    "noisy_lowrank_spectrum",
    "fast_decay_spectrum",
    "gen_noisy_lowrank",
    "gen_fast_decay",
    "gen_rpca_instance",
    "sample_positions",
    "generate",
]

FAMILIES = ("noisy-lowrank", "fast-decay", "rpca")


@dataclass(frozen=True)
class TestMatrixSpec:
    """Parameters of one synthetic matrix; ``k`` doubles as the rank ``r``
    of the rpca family."""

    __test__ = False  # not a pytest class

    family: str
    n: int
    k: int
    gap: float = 0.01
    s: int = 0
    amplitude: float = 80.0
    seed: RngSeed = RngSeed()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not 1 <= self.k < self.n:
            raise ParameterError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if self.family == "noisy-lowrank" and not self.gap > 0:
            raise ParameterError("gap must be positive")
        if self.family == "rpca":
            if not 0 <= self.s <= self.n * self.n:
                raise ParameterError(f"s must lie in [0, n^2], got {self.s}")
            if self.amplitude == 0:
                raise ParameterError("amplitude must be nonzero")


def _orthonormal(n, k, seed):
    return householder_qr(gaussian(n, k, seed)).q


def noisy_lowrank_spectrum(n: int, k: int) -> np.ndarray:
    """Leading ``k`` values of the line from 1 (index 1) to 1e-9 (index n)."""
    j = np.arange(k)
    return 1.0 - j * (1.0 - 1e-9) / (n - 1)


def fast_decay_spectrum(n: int, k: int) -> np.ndarray:
    """``sigma_j = 1`` for ``j <= k`` and ``(j - k + 1)^-2`` beyond."""
    sigma = np.ones(n)
    sigma[k:] = 1.0 / (np.arange(k + 1, n + 1) - k + 1.0) ** 2
    return sigma


def gen_noisy_lowrank(n: int, k: int, gap: float, seed: RngSeed = RngSeed()) -> np.ndarray:
    """Rank-``k`` matrix plus Gaussian noise of spectral norm ``gap * sigma_k``.

    ``A = U diag(sigma) V^T + E`` with ``U, V`` ``n x k`` orthonormal (QR of
    Gaussians from sub-streams 0 and 1) and ``E`` from sub-stream 2.
    """
    TestMatrixSpec("noisy-lowrank", n, k, gap=gap)
    seed = RngSeed(*seed)
    sigma = noisy_lowrank_spectrum(n, k)
    u = _orthonormal(n, k, seed.substream(0))
    v = _orthonormal(n, k, seed.substream(1))
    e = gaussian(n, n, seed.substream(2))
    e *= gap * sigma[-1] / svd(e).sigma[0]
    return (u * sigma) @ v.T + e


def gen_fast_decay(n: int, k: int = 10, seed: RngSeed = RngSeed()) -> np.ndarray:
    """``U diag(sigma) V^T`` with the fast-decay spectrum and full ``n x n``
    orthonormal ``U, V`` (sub-streams 0 and 1)."""
    TestMatrixSpec("fast-decay", n, k)
    seed = RngSeed(*seed)
    sigma = fast_decay_spectrum(n, k)
    u = _orthonormal(n, n, seed.substream(0))
    v = _orthonormal(n, n, seed.substream(1))
    return (u * sigma) @ v.T


def sample_positions(total: int, count: int, gen: Xoshiro256pp) -> np.ndarray:
    """``count`` distinct indices of ``range(total)`` by partial Fisher-Yates."""
    if not 0 <= count <= total:
        raise ParameterError(f"cannot draw {count} of {total} without replacement")
    pool = np.arange(total)
    for i in range(count):
        j = i + gen.below(total - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:count].copy()


def gen_rpca_instance(n: int, r: int, s: int, amplitude: float = 80.0,
                      seed: RngSeed = RngSeed()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Low-rank plus sparse instance ``M = L + S``.

    ``L = U V^T`` with ``n x r`` standard Gaussian ``U, V`` (sub-streams 0
    and 1). ``S`` has exactly ``s`` nonzeros at positions drawn uniformly
    without replacement, each ``+amplitude`` or ``-amplitude`` according to
    the top bit of a generator draw (sub-stream 2, after the positions).

    Returns:
        (m, l_true, s_true)
    """
    TestMatrixSpec("rpca", n, r, s=s, amplitude=amplitude)
    seed = RngSeed(*seed)
    u = gaussian(n, r, seed.substream(0))
    v = gaussian(n, r, seed.substream(1))
    low = u @ v.T
    gen = Xoshiro256pp(seed.substream(2))
    pos = sample_positions(n * n, s, gen)
    bits = np.array(gen.fill_u64(s), dtype=np.uint64) >> np.uint64(63)
    sparse = np.zeros(n * n)
    sparse[pos] = np.where(bits == 0, amplitude, -amplitude)
    sparse = sparse.reshape(n, n)
    return low + sparse, low, sparse


def generate(spec: TestMatrixSpec):
    """Dispatch on ``spec.family``; rpca returns the (m, l, s) triple."""
    if spec.family == "noisy-lowrank":
        return gen_noisy_lowrank(spec.n, spec.k, spec.gap, spec.seed)
    if spec.family == "fast-decay":
        return gen_fast_decay(spec.n, spec.k, spec.seed)
    return gen_rpca_instance(spec.n, spec.k, spec.s, spec.amplitude, spec.seed)
