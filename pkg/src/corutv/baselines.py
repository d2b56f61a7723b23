"""Reference low-rank approximations: truncated SVD, truncated QRCP,
two-sided randomized SVD (TSR-SVD) and subspace-orbit randomized SVD
(SOR-SVD)."""

from __future__ import annotations

import numpy as np

from .matcore import (
    ParameterError,
    RngSeed,
    ShapeError,
    SvdFactors,
    as_matrix,
    gaussian,
    householder_qr,
    pinv,
    qrcp,
    svd,
)
from .utv import _check_sizes, compress

__all__ = ["svd_rank_k", "qrcp_rank_k", "tsr_svd", "tsr_svd_rank_k", "sor_svd"]


def _check_rank(k, limit):
    if int(k) != k or not 1 <= k <= limit:
        raise ParameterError(f"k must lie in [1, {limit}], got {k}")


def svd_rank_k(a, k: int, factors: SvdFactors | None = None) -> np.ndarray:
    """Optimal rank-``k`` approximation ``U_k diag(sigma_k) V_k^T``.

    ``factors`` may carry a precomputed :func:`svd` of ``a``.
    """
    a = as_matrix(a)
    _check_rank(k, min(a.shape))
    f = factors if factors is not None else svd(a)
    return (f.u[:, :k] * f.sigma[:k]) @ f.v[:, :k].T


def qrcp_rank_k(a, k: int) -> np.ndarray:
    """Rank-``k`` truncation ``Q[:, :k] R[:k, :] P^T`` of the pivoted QR."""
    a = as_matrix(a)
    m, n = a.shape
    if m < n:
        raise ShapeError(f"qrcp_rank_k needs rows >= cols, got {a.shape}")
    _check_rank(k, n)
    f = qrcp(a)
    out = np.empty_like(a)
    out[:, f.perm] = f.q[:, :k] @ f.r[:k, :]
    return out


def tsr_svd(a, ell: int, seed: RngSeed = RngSeed()) -> SvdFactors:
    """Single-pass two-sided randomized SVD of rank ``ell``.

    ``Phi1`` (n x ell) comes from ``seed`` and ``Phi2`` (m x ell) from the
    next stream. ``B = Q1^T Y1 (Q2^T Phi1)^+`` approximates
    ``Q1^T A Q2`` and its SVD is lifted back by ``Q1`` and ``Q2``.
    """
    a = as_matrix(a)
    m, n = a.shape
    _check_sizes(a.shape, ell, 0)
    seed = RngSeed(*seed)
    phi1 = gaussian(n, ell, seed)
    phi2 = gaussian(m, ell, seed.substream(1))
    y1 = a @ phi1
    y2 = a.T @ phi2
    q1 = householder_qr(y1).q
    q2 = householder_qr(y2).q
    b = (q1.T @ y1) @ pinv(q2.T @ phi1)
    fb = svd(b)
    return SvdFactors(q1 @ fb.u, fb.sigma, q2 @ fb.v, fb.converged)


def tsr_svd_rank_k(a, k: int, ell: int, seed: RngSeed = RngSeed()) -> np.ndarray:
    """Leading ``k`` triplets of :func:`tsr_svd` multiplied out."""
    if int(k) != k or not 1 <= k <= ell:
        raise ParameterError(f"k must lie in [1, {ell}], got {k}")
    f = tsr_svd(a, ell, seed)
    return (f.u[:, :k] * f.sigma[:k]) @ f.v[:, :k].T


def sor_svd(a, k: int, ell: int, q: int = 0, seed: RngSeed = RngSeed()) -> np.ndarray:
    """Rank-``k`` approximation ``Q1 D_k Q2^T``.

    The sketch and compression are identical to :func:`corutv.utv.corutv`
    with the same seed; the pivoted QR of ``D`` is replaced by its
    truncated SVD ``D_k``.
    """
    a = as_matrix(a)
    _check_sizes(a.shape, ell, q)
    if int(k) != k or not 1 <= k <= ell:
        raise ParameterError(f"k must lie in [1, {ell}], got {k}")
    wide = a.shape[0] < a.shape[1]
    work = a.T if wide else a
    comp = compress(work, ell, q, RngSeed(*seed))
    fd = svd(comp.exact_d(work))
    dk = (fd.u[:, :k] * fd.sigma[:k]) @ fd.v[:, :k].T
    out = comp.q1 @ dk @ comp.q2.T
    return out.T if wide else out
