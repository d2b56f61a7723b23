"""Compressed randomized UTV (CoR-UTV) decomposition.

The input is sketched from both sides, ``C1 = A Psi`` and ``C2 = A^T C1``
(optionally with ``q`` alternating power steps), the orthonormal factors
``Q1, Q2`` of the two sketches compress ``A`` to the small ``ell x ell``
matrix ``D = Q1^T A Q2``, and a column-pivoted QR of ``D`` yields

    A ~= U T V^T,   U = Q1 Q~,  T = R~,  V = Q2 P~.

Wide inputs (m < n) are handled by factoring ``A^T`` and transposing the
result, which gives a lower-triangular middle factor (ULV form).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .matcore import (
    ParameterError,
    RngSeed,
    as_matrix,
    gaussian,
    householder_qr,
    pinv,
    qrcp,
    svd,
)

__all__ = [
    "ConditioningWarning",
    "UtvApprox",
    "BoundReport",
    "FlopModel",
    "Compression",
    "compress",
    "corutv",
    "truncate_rank_k",
    "singular_estimates",
    "cor_threshold",
    "cor_shrink",
    "bound_report",
    "flop_estimate",
]

VARIANTS = ("exact", "approx")


class ConditioningWarning(RuntimeWarning):
    """The power-iterated sketch lost numerical rank."""


@dataclass(frozen=True)
class UtvApprox:
    """Rank-``ell`` factorization ``A ~= u @ t @ v.T``.

    ``triangle`` is ``"upper"`` for tall inputs (URV) and ``"lower"`` for
    wide inputs (ULV). ``q1``, ``d`` and ``q2`` keep the compressed form
    ``q1 @ d @ q2.T`` of the same approximation, expressed in the
    orientation of the original input.
    """

    u: np.ndarray
    t: np.ndarray
    v: np.ndarray
    ell: int
    q: int
    variant: str
    seed: RngSeed
    triangle: str = "upper"
    q1: np.ndarray | None = field(default=None, repr=False)
    d: np.ndarray | None = field(default=None, repr=False)
    q2: np.ndarray | None = field(default=None, repr=False)

    def matrix(self) -> np.ndarray:
        return self.u @ self.t @ self.v.T

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape[0], self.v.shape[0]


@dataclass(frozen=True)
class BoundReport:
    """Realized rank-revealing and error-bound quantities for one sketch."""

    k: int
    p: int
    sigma_k_A: float
    sigma_k_D: float
    sigma_k_D_lower: float
    sigma_k_D_lower_printed: float
    psi2_norm: float
    psi1_pinv_norm: float
    bound_value_fro: float
    bound_value_spec: float
    observed_error_fro: float
    observed_error_spec: float
    psi1_full_rank: bool
    interlacing_lower_ok: bool

    @property
    def bounds_hold(self) -> bool:
        """Observed errors within both bounds; trivially true when the
        full-rank assumption fails."""
        if not self.psi1_full_rank:
            return True
        return (
            self.observed_error_fro <= self.bound_value_fro
            and self.observed_error_spec <= self.bound_value_spec
        )


@dataclass(frozen=True)
class FlopModel:
    m: int
    n: int
    ell: int
    q: int
    variant: str
    c_mult: float
    total: float
    passes: int


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ParameterError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _check_sizes(shape, ell, q):
    if int(ell) != ell or ell < 1:
        raise ParameterError(f"ell must be a positive integer, got {ell}")
    if ell >= min(shape):
        raise ParameterError(f"ell={ell} must be smaller than min(m, n)={min(shape)}")
    if int(q) != q or q < 0:
        raise ParameterError(f"q must be a non-negative integer, got {q}")


@dataclass(frozen=True)
class Compression:
    """Two-sided sketch of a tall matrix.

    ``c2_prev`` is the sketch that multiplied ``A`` to produce the final
    ``c1``; it is ``Psi`` itself when no power steps are taken.
    """

    q1: np.ndarray
    r1: np.ndarray
    q2: np.ndarray
    c1: np.ndarray
    c2_prev: np.ndarray
    psi: np.ndarray

    def exact_d(self, a) -> np.ndarray:
        return self.q1.T @ (a @ self.q2)

    def approx_d(self) -> np.ndarray:
        return (self.q1.T @ self.c1) @ pinv(self.q2.T @ self.c2_prev)


def compress(a: np.ndarray, ell: int, q: int, seed: RngSeed) -> Compression:
    """Sketch a tall matrix ``a`` with ``q`` power steps.

    ``Psi`` is ``gaussian(n, ell, seed)``. No re-orthonormalization happens
    between power steps; a :class:`ConditioningWarning` is issued when the
    R factor of the final ``C1`` has ``|R[-1,-1]| <= 1e-14 |R[0,0]|``.
    """
    n = a.shape[1]
    psi = gaussian(n, ell, seed)
    c2 = psi
    for _ in range(q + 1):
        c1 = a @ c2
        c2_prev = c2
        c2 = a.T @ c1
    f1 = householder_qr(c1)
    f2 = householder_qr(c2)
    top = abs(f1.r[0, 0])
    if abs(f1.r[-1, -1]) <= 1e-14 * top:
        warnings.warn(
            f"sketch C1 is numerically rank deficient (|R(l,l)|/|R(1,1)| <= 1e-14, q={q})",
            ConditioningWarning,
            stacklevel=3,
        )
    return Compression(f1.q, f1.r, f2.q, c1, c2_prev, psi)


def corutv(a, ell: int, q: int = 0, variant: str = "exact", seed: RngSeed = RngSeed()) -> UtvApprox:
    """Rank-``ell`` CoR-UTV approximation of ``a``.

    Args:
        a: m x n matrix.
        ell: sample size, ``1 <= ell < min(m, n)``.
        q: number of power steps (0 gives the basic three-pass algorithm).
        variant: ``"exact"`` forms ``D = Q1^T A Q2``; ``"approx"`` uses the
            single-pass surrogate ``Q1^T C1 (Q2^T C2')^+`` where ``C2'`` is
            the sketch that produced ``C1`` (``Psi`` when ``q = 0``).
        seed: seed of the Gaussian test matrix.

    Returns:
        UtvApprox; for m < n the factorization of ``a.T`` transposed, with
        a lower-triangular ``t``.
    """
    a = as_matrix(a)
    _check_variant(variant)
    _check_sizes(a.shape, ell, q)
    seed = RngSeed(*seed)
    m, n = a.shape
    wide = m < n
    work = a.T if wide else a
    comp = compress(work, ell, q, seed)
    d = comp.exact_d(work) if variant == "exact" else comp.approx_d()
    f = qrcp(d)
    u = comp.q1 @ f.q
    v = comp.q2[:, f.perm]
    if wide:
        return UtvApprox(v, f.r.T, u, ell, q, variant, seed, "lower", comp.q2, d.T, comp.q1)
    return UtvApprox(u, f.r, v, ell, q, variant, seed, "upper", comp.q1, d, comp.q2)


def truncate_rank_k(approx: UtvApprox, k: int) -> np.ndarray:
    """Rank-``k`` matrix ``U[:, :k] T[:k, :] V^T`` (URV form).

    In ULV form the leading ``k`` columns of ``T`` and ``V`` are kept,
    which is the transpose of the URV truncation of ``A^T``.
    """
    if int(k) != k or not 1 <= k <= approx.ell:
        raise ParameterError(f"k must lie in [1, {approx.ell}], got {k}")
    if approx.triangle == "upper":
        return approx.u[:, :k] @ (approx.t[:k, :] @ approx.v.T)
    return (approx.u @ approx.t[:, :k]) @ approx.v[:, :k].T


def singular_estimates(approx: UtvApprox) -> np.ndarray:
    """``|diag(T)|``, the singular-value estimates, non-increasing."""
    return np.abs(np.diag(approx.t))


def cor_threshold(a, delta: float, ell: int, q: int = 0, seed: RngSeed = RngSeed(),
                  variant: str = "exact") -> tuple[np.ndarray, int]:
    """CoR-UTV thresholding: keep the leading ``r`` rows of ``T`` where
    ``r`` counts the diagonal entries with ``|t_jj| > delta``.

    Returns:
        (matrix, r); ``r = 0`` gives the zero matrix.
    """
    if delta < 0:
        raise ParameterError(f"delta must be non-negative, got {delta}")
    approx = corutv(a, ell, q, variant, seed)
    r = int(np.count_nonzero(singular_estimates(approx) > delta))
    if r == 0:
        return np.zeros(approx.shape), 0
    return truncate_rank_k(approx, r), r


def cor_shrink(a, delta: float, ell: int, q: int = 0, seed: RngSeed = RngSeed(),
               variant: str = "exact") -> tuple[np.ndarray, int]:
    """Soft-thresholded variant of :func:`cor_threshold`.

    The rank ``r`` is chosen from ``diag(T)`` exactly as in
    :func:`cor_threshold`, but the kept block ``U[:, :r] T[:r, :] V^T`` is
    passed through exact singular value thresholding at ``delta`` (an SVD
    of the small ``r x ell`` block). Unlike the hard truncation this is the
    proximal step of the nuclear norm restricted to the sketched subspace.

    Returns:
        (matrix, r') where ``r'`` counts the block singular values above
        ``delta``.
    """
    if delta < 0:
        raise ParameterError(f"delta must be non-negative, got {delta}")
    approx = corutv(a, ell, q, variant, seed)
    r = int(np.count_nonzero(singular_estimates(approx) > delta))
    if r == 0:
        return np.zeros(approx.shape), 0
    if approx.triangle == "upper":
        left, mid, right = approx.u[:, :r], approx.t[:r, :], approx.v
    else:
        left, mid, right = approx.u, approx.t[:, :r], approx.v[:, :r]
    f = svd(mid)
    keep = int(np.count_nonzero(f.sigma > delta))
    if keep == 0:
        return np.zeros(approx.shape), 0
    lu = left @ (f.u[:, :keep] * (f.sigma[:keep] - delta))
    return lu @ (right @ f.v[:, :keep]).T, keep


def bound_report(a, k: int, p: int | None = None, ell: int | None = None, q: int = 0,
                 seed: RngSeed = RngSeed(), svd_a=None) -> BoundReport:
    """Evaluate the deterministic bounds for one sketch realization.

    The sketch ``Psi`` is regenerated from ``seed`` exactly as
    :func:`corutv` draws it, rotated into the right singular basis of ``A``
    and split into its first ``ell - p`` rows (``Psi1``) and the rest
    (``Psi2``). With ``X = ||Psi2||^2 ||Psi1^+||^2``, ``s = sigma_{ell-p+1}``
    and ``g = (s / sigma_k)^(2q)``:

    * lower bound ``sigma_k(D) >= sigma_k / sqrt(1 + X (s/sigma_k)^(4q+2))``.
      Since ``sigma(D) = sigma(Q1^T A)`` and ``Q1`` spans a sketch of
      power ``2q + 1``, the exponent is ``4q + 2``; the ``4q + 4`` variant
      is reported as ``sigma_k_D_lower_printed`` but fails for ``q = 0``;
    * error bound ``||A0|| + sqrt(a^2 X / (1 + b^2 X)) + sqrt(h^2 X / (1 + t^2 X))``
      with ``a = sqrt(k) s^2/sigma_k g``, ``b = s^2/(sigma_1 sigma_k) g``,
      ``h = sqrt(k) s g``, ``t = s/sigma_1 g``.

    Args:
        a: input matrix (wide inputs are transposed first).
        k: target rank.
        p: oversampling; defaults to ``ell - k``.
        ell: sample size; defaults to ``2 k``.
        q: power steps.
        seed: sketch seed.
        svd_a: optional precomputed :func:`svd` of ``a`` (same orientation).
    """
    a = as_matrix(a)
    if ell is None:
        ell = 2 * k
    if p is None:
        p = ell - k
    if k < 1 or p < 0 or not 2 <= p + k <= ell:
        raise ParameterError(f"need 2 <= p + k <= ell, got k={k}, p={p}, ell={ell}")
    _check_sizes(a.shape, ell, q)
    seed = RngSeed(*seed)
    transposed = a.shape[0] < a.shape[1]
    work = a.T if transposed else a
    fa = svd_a if svd_a is not None else svd(a)
    if transposed:
        fa = type(fa)(fa.v, fa.sigma, fa.u, fa.converged)
    m, n = work.shape
    sigma = np.zeros(n)
    sigma[: fa.sigma.size] = fa.sigma
    sigma_1, sigma_k = sigma[0], sigma[k - 1]
    if sigma_k <= 0.0:
        raise ParameterError("sigma_k(A) is zero; the bounds are undefined")

    psi = gaussian(n, ell, seed)
    vfull = fa.v
    if vfull.shape[1] < n:
        raise ParameterError("svd_a must provide a full right singular basis")
    psi_t = vfull.T @ psi
    psi1, psi2 = psi_t[: ell - p], psi_t[ell - p:]
    s1 = np.linalg.svd(psi1, compute_uv=False)
    full_rank = bool(s1[-1] > 1e-12 * s1[0])
    psi1_pinv_norm = 1.0 / s1[-1] if s1[-1] > 0 else math.inf
    psi2_norm = float(np.linalg.svd(psi2, compute_uv=False)[0]) if psi2.size else 0.0
    x = psi2_norm**2 * psi1_pinv_norm**2

    s = sigma[ell - p]
    gamma = s / sigma_k
    g = gamma ** (2 * q)
    alpha = math.sqrt(k) * s * s / sigma_k * g
    beta = s * s / (sigma_1 * sigma_k) * g
    eta = math.sqrt(k) * s * g
    tau = s / sigma_1 * g

    def _term(c, d):
        if x == 0.0 or c == 0.0:
            return 0.0
        if math.isinf(x):
            return c / d if d > 0 else math.inf
        return math.sqrt(c * c * x / (1.0 + d * d * x))

    tail = sigma[k:]
    spread = _term(alpha, beta) + _term(eta, tau)
    bound_fro = float(np.sqrt(np.sum(tail * tail))) + spread
    bound_spec = (float(tail[0]) if tail.size else 0.0) + spread
    def _lower(power):
        return sigma_k / math.sqrt(1.0 + x * gamma**power) if not math.isinf(x) else 0.0

    approx = corutv(work, ell, q, "exact", seed)
    resid = work - approx.matrix()
    sd = np.linalg.svd(approx.d, compute_uv=False)
    lower_interlace = bool(np.all(sigma[1 : ell + 1] <= sd[:ell] * (1 + 1e-10) + 1e-10 * sigma_1))
    return BoundReport(
        k=k,
        p=p,
        sigma_k_A=float(sigma_k),
        sigma_k_D=float(sd[k - 1]),
        sigma_k_D_lower=float(_lower(4 * q + 2)),
        sigma_k_D_lower_printed=float(_lower(4 * q + 4)),
        psi2_norm=psi2_norm,
        psi1_pinv_norm=float(psi1_pinv_norm),
        bound_value_fro=bound_fro,
        bound_value_spec=bound_spec,
        observed_error_fro=float(np.linalg.norm(resid)),
        observed_error_spec=float(np.linalg.norm(resid, 2)),
        psi1_full_rank=full_rank,
        interlacing_lower_ok=lower_interlace,
    )


def flop_estimate(m: int, n: int, ell: int, q: int = 0, variant: str = "exact",
                  c_mult: float | None = None) -> FlopModel:
    """Leading-order flop count and pass count of CoR-UTV.

    ``c_mult`` is the cost of one matrix-vector product with ``A``;
    it defaults to the dense value ``2 m n``.
    """
    _check_variant(variant)
    if min(m, n) < 1 or ell < 1 or ell > min(m, n) or q < 0:
        raise ParameterError(f"invalid sizes m={m}, n={n}, ell={ell}, q={q}")
    if c_mult is None:
        c_mult = 2.0 * m * n
    if variant == "exact":
        passes = 2 * q + 3
        total = passes * ell * c_mult + 6 * m * ell**2 + n * ell * (2 * ell + 3) + 8.0 / 3.0 * ell**3
    else:
        passes = 2 * q + 2
        total = passes * ell * c_mult + 6 * m * ell**2 + n * ell * (4 * ell + 3) + 17.0 / 3.0 * ell**3
    return FlopModel(m, n, ell, q, variant, float(c_mult), float(total), passes)
