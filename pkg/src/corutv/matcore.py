"""Dense linear-algebra kernels and seeded Gaussian sketches.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Every public
function validates its inputs through :func:`as_matrix`, which rejects
non-2D or non-finite data.

The random sketches follow a fixed recipe so that a given ``RngSeed``
reproduces the same bits on any platform:

* the 256-bit xoshiro256++ state is ``[w1(seed), w2(seed), w1(stream),
  w2(stream)]`` where ``w1(x), w2(x)`` are the first two SplitMix64 outputs
  for initial state ``x``;
* consecutive generator outputs ``x1, x2`` become uniforms
  ``u = (x >> 11) * 2**-53``;
* Box-Muller: ``r = sqrt(-2 log(1 - u1))`` gives the pair
  ``r cos(2 pi u2), r sin(2 pi u2)``;
* matrices are filled row-major; an odd trailing sine is discarded.
"""

from __future__ import annotations

import math
from typing import NamedTuple
import warnings

import numpy as np

__all__ = [
    "ShapeError",
    "ParameterError",
    "ConvergenceWarning",
    "RngSeed",
    "QrFactors",
    "QrcpFactors",
    "SvdFactors",
    "Xoshiro256pp",
    "as_matrix",
    "matmul",
    "householder_qr",
    "qrcp",
    "svd",
    "jacobi_svd",
    "pinv",
    "gaussian",
    "norm",
]

_MASK64 = (1 << 64) - 1
EPS = np.finfo(np.float64).eps


class ShapeError(ValueError):
    """Operand dimensions are incompatible with the operation."""


class ParameterError(ValueError):
    """A scalar parameter is outside its admissible range."""


class ConvergenceWarning(RuntimeWarning):
    """An iterative kernel stopped at its iteration cap."""


class RngSeed(NamedTuple):
    seed: int = 0
    stream: int = 0

    def substream(self, offset: int) -> "RngSeed":
        """Seed for the stream ``offset`` positions after this one."""
        return RngSeed(self.seed, (self.stream + offset) & _MASK64)


class QrFactors(NamedTuple):
    q: np.ndarray
    r: np.ndarray


class QrcpFactors(NamedTuple):
    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray

    def permutation_matrix(self) -> np.ndarray:
        n = len(self.perm)
        p = np.zeros((n, n))
        p[self.perm, np.arange(n)] = 1.0
        return p


class SvdFactors(NamedTuple):
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    converged: bool = True

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite float64 2-D array.

    Raises:
        ShapeError: if ``a`` is not two-dimensional or has an empty axis.
        ValueError: if any entry is NaN or infinite.
    """
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"matrix dimensions must be positive, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def matmul(a, b) -> np.ndarray:
    """Matrix product ``a @ b``.

    The reference semantics is the i-k-j triple loop; the BLAS-backed
    product agrees with it to 1e-12 relative per entry on well-scaled data.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


# ---------------------------------------------------------------------------
# QR factorizations


def _householder(x):
    """Reflector ``(v, beta, alpha)`` with ``(I - beta v v^T) x = alpha e1``.

    ``alpha = -sign(x[0]) * ||x||`` with ``sign(0) = +1``; ``v[0] = 1``.
    """
    normx = np.linalg.norm(x)
    v = x.copy()
    if normx == 0.0:
        v[:] = 0.0
        v[0] = 1.0
        return v, 0.0, 0.0
    alpha = -normx if x[0] >= 0 else normx
    v[0] = x[0] - alpha
    v /= v[0]
    beta = (alpha - x[0]) / alpha
    return v, beta, alpha


def _form_q(reflectors, m, n):
    q = np.zeros((m, n))
    q[:n, :n] = np.eye(n)
    for j in range(len(reflectors) - 1, -1, -1):
        v, beta = reflectors[j]
        if beta == 0.0:
            continue
        block = q[j:, j:]
        block -= beta * np.outer(v, v @ block)
    return q


def householder_qr(a) -> QrFactors:
    """Economy Householder QR of a tall matrix.

    ``R`` keeps the raw reflector signs: ``R[j, j] = -sign(x0) * ||x||``
    where ``x0`` is the leading entry of the working column (zero columns
    give ``R[j, j] = 0`` and an identity reflector). No sign normalization
    is applied.

    Raises:
        ShapeError: if ``a`` has more columns than rows.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m < n:
        raise ShapeError(f"householder_qr needs rows >= cols, got {a.shape}")
    w = a.copy()
    reflectors = []
    for j in range(n):
        v, beta, alpha = _householder(w[j:, j])
        if beta != 0.0 and j + 1 < n:
            tail = w[j:, j + 1:]
            tail -= beta * np.outer(v, v @ tail)
        w[j, j] = alpha
        w[j + 1:, j] = 0.0
        reflectors.append((v, beta))
    q = _form_q(reflectors, m, n)
    return QrFactors(q, np.triu(w[:n, :]))


def qrcp(a) -> QrcpFactors:
    """Householder QR with Businger-Golub column pivoting, ``A P = Q R``.

    At step ``j`` the remaining column with the largest updated norm is
    moved to position ``j``; exact ties go to the lowest index. Squared
    column norms are downdated and recomputed when the downdated value
    falls below 1e-6 of the value at its last recomputation.

    Returns:
        QrcpFactors with ``perm`` such that ``A[:, perm] = Q @ R``.

    Raises:
        ShapeError: if ``a`` has more columns than rows.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m < n:
        raise ShapeError(f"qrcp needs rows >= cols, got {a.shape}")
    w = a.copy()
    perm = np.arange(n)
    partial = np.einsum("ij,ij->j", w, w)
    reference = partial.copy()
    reflectors = []
    for j in range(n):
        p = j + int(np.argmax(partial[j:]))
        if p != j:
            w[:, [j, p]] = w[:, [p, j]]
            perm[[j, p]] = perm[[p, j]]
            partial[[j, p]] = partial[[p, j]]
            reference[[j, p]] = reference[[p, j]]
        v, beta, alpha = _householder(w[j:, j])
        if beta != 0.0 and j + 1 < n:
            tail = w[j:, j + 1:]
            tail -= beta * np.outer(v, v @ tail)
        w[j, j] = alpha
        w[j + 1:, j] = 0.0
        reflectors.append((v, beta))
        if j + 1 < n:
            rest = slice(j + 1, n)
            partial[rest] = partial[rest] - w[j, rest] ** 2
            stale = np.nonzero(partial[rest] <= 1e-6 * reference[rest])[0] + j + 1
            if stale.size:
                fresh = np.einsum("ij,ij->j", w[j + 1:, stale], w[j + 1:, stale])
                partial[stale] = fresh
                reference[stale] = fresh
    q = _form_q(reflectors, m, n)
    return QrcpFactors(q, np.triu(w[:n, :]), perm)


# ---------------------------------------------------------------------------
# SVD


def _normalize_signs(u, v):
    """Flip singular-vector pairs so each column of ``u`` has its
    largest-magnitude entry positive."""
    if u.shape[1] == 0:
        return u, v
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, v * signs


def svd(a, method: str = "lapack") -> SvdFactors:
    """Economy SVD ``A = U diag(sigma) V^T``.

    Args:
        a: m x n matrix.
        method: ``"lapack"`` (divide and conquer via numpy) or ``"jacobi"``
            (one-sided cyclic Jacobi, see :func:`jacobi_svd`).

    Returns:
        SvdFactors with ``u`` m x r, ``sigma`` length r non-increasing,
        ``v`` n x r, r = min(m, n). Each column of ``u`` has its
        largest-magnitude entry positive.
    """
    a = as_matrix(a)
    if method == "jacobi":
        return jacobi_svd(a)
    if method != "lapack":
        raise ParameterError(f"unknown svd method {method!r}")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    u, v = _normalize_signs(u, vt.T)
    return SvdFactors(u, s, v, True)


def jacobi_svd(a, tol: float = 1e-14, max_sweeps: int = 60) -> SvdFactors:
    """One-sided (Hestenes) Jacobi SVD with cyclic sweeps.

    Column pairs are orthogonalized in round-robin order, n/2 disjoint pairs
    per step, so one sweep visits every pair once. The iteration stops when
    no pair in a sweep has ``|g_p . g_q| > tol * ||g_p|| ||g_q||``; after
    ``max_sweeps`` it returns with ``converged=False`` and a warning.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m < n:
        f = jacobi_svd(a.T, tol, max_sweeps)
        return SvdFactors(f.v, f.sigma, f.u, f.converged)
    g = a.copy()
    v = np.eye(n)
    # round-robin schedule on an even number of slots; slot n is a dummy
    slots = n + (n % 2)
    order = list(range(slots))
    rounds = []
    for _ in range(slots - 1):
        half = slots // 2
        pairs = [(order[i], order[slots - 1 - i]) for i in range(half)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        order = [order[0]] + [order[-1]] + order[1:-1]
    converged = n < 2
    for _ in range(max_sweeps):
        if converged:
            break
        rotated = False
        for p, q in rounds:
            gp, gq = g[:, p], g[:, q]
            alpha = np.einsum("ij,ij->j", gp, gp)
            beta = np.einsum("ij,ij->j", gq, gq)
            gamma = np.einsum("ij,ij->j", gp, gq)
            active = np.abs(gamma) > tol * np.sqrt(alpha * beta)
            if not np.any(active):
                continue
            rotated = True
            p, q = p[active], q[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            gp, gq = g[:, p], g[:, q]
            g[:, p] = c * gp - s * gq
            g[:, q] = s * gp + c * gq
            vp, vq = v[:, p], v[:, q]
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
        if not rotated:
            converged = True
    if not converged:
        warnings.warn(f"jacobi_svd did not converge in {max_sweeps} sweeps", ConvergenceWarning)
    sigma = np.linalg.norm(g, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    g = g[:, order]
    v = v[:, order]
    u = np.zeros_like(g)
    nz = sigma > 0
    u[:, nz] = g[:, nz] / sigma[nz]
    if not np.all(nz):
        u = _complete_basis(u, nz)
    u, v = _normalize_signs(u, v)
    return SvdFactors(u, sigma, v, converged)


def _complete_basis(u, filled):
    """Replace the columns of ``u`` flagged False in ``filled`` with
    orthonormal vectors orthogonal to the flagged-True columns."""
    m, r = u.shape
    basis = u[:, filled]
    out = u.copy()
    missing = np.nonzero(~filled)[0]
    e = np.eye(m)
    candidates = iter(range(m))
    for j in missing:
        while True:
            x = e[:, next(candidates)]
            x = x - basis @ (basis.T @ x)
            x = x - basis @ (basis.T @ x)
            nx = np.linalg.norm(x)
            if nx > 1e-8:
                break
        out[:, j] = x / nx
        basis = np.column_stack([basis, out[:, j]])
    return out


def pinv(a, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via :func:`svd`.

    Singular values at or below ``tol * sigma_1`` are treated as zero;
    ``tol`` defaults to ``max(m, n) * eps``.
    """
    a = as_matrix(a)
    m, n = a.shape
    if tol is None:
        tol = max(m, n) * EPS
    f = svd(a)
    if f.sigma.size == 0 or f.sigma[0] == 0.0:
        return np.zeros((n, m))
    keep = f.sigma > tol * f.sigma[0]
    inv = np.zeros_like(f.sigma)
    inv[keep] = 1.0 / f.sigma[keep]
    return (f.v * inv) @ f.u.T


# ---------------------------------------------------------------------------
# random sketches


def _splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Xoshiro256pp:
    """xoshiro256++ generator seeded from an ``RngSeed`` via SplitMix64."""

    def __init__(self, seed: RngSeed | tuple[int, int] = RngSeed()):
        seed = RngSeed(*seed)
        words = []
        for x in (seed.seed & _MASK64, seed.stream & _MASK64):
            x, w1 = _splitmix64(x)
            x, w2 = _splitmix64(x)
            words += [w1, w2]
        self.state = words

    @classmethod
    def from_state(cls, state) -> "Xoshiro256pp":
        gen = cls.__new__(cls)
        gen.state = [int(s) & _MASK64 for s in state]
        return gen

    def next_u64(self) -> int:
        return self.fill_u64(1)[0]

    def fill_u64(self, count: int) -> list[int]:
        M = _MASK64
        s0, s1, s2, s3 = self.state
        out = [0] * count
        for i in range(count):
            t = (s0 + s3) & M
            out[i] = ((((t << 23) | (t >> 41)) & M) + s0) & M
            t = (s1 << 17) & M
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & M
        self.state = [s0, s1, s2, s3]
        return out

    def uniforms(self, count: int) -> np.ndarray:
        """``count`` doubles in [0, 1) from the top 53 bits of each output."""
        raw = np.array(self.fill_u64(count), dtype=np.uint64)
        return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def below(self, bound: int) -> int:
        """Unbiased integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ParameterError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % bound

    def normals(self, count: int) -> np.ndarray:
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = 2.0 * math.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:count]


def gaussian(rows: int, cols: int, seed: RngSeed | tuple[int, int] = RngSeed()) -> np.ndarray:
    """Standard Gaussian ``rows x cols`` matrix, reproducible per seed."""
    if rows < 1 or cols < 1:
        raise ParameterError(f"gaussian dimensions must be positive, got {rows}x{cols}")
    gen = Xoshiro256pp(seed)
    return gen.normals(rows * cols).reshape(rows, cols)


# ---------------------------------------------------------------------------
# norms


def norm(a, kind: str = "frobenius") -> float:
    """Matrix norm; ``kind`` is one of spectral, frobenius, nuclear, l1,
    l0count. ``l0count`` counts entries with ``|x| > 0``."""
    a = as_matrix(a)
    if kind == "frobenius":
        return float(np.sqrt(np.sum(a * a)))
    if kind == "l1":
        return float(np.sum(np.abs(a)))
    if kind == "l0count":
        return float(np.count_nonzero(a))
    if kind in ("spectral", "nuclear"):
        s = np.linalg.svd(a, compute_uv=False)
        return float(s[0] if kind == "spectral" else np.sum(s))
    raise ParameterError(f"unknown norm kind {kind!r}")
