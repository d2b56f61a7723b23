"""Independent reference implementations used only by the tests."""

from fractions import Fraction

import mpmath
import numpy as np


def triple_loop_matmul(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape
    p = b.shape[1]
    out = [[0.0] * p for _ in range(m)]
    for i in range(m):
        for j in range(p):
            acc = 0.0
            for k in range(n):
                acc += float(a[i, k]) * float(b[k, j])
            out[i][j] = acc
    return np.array(out)


def charpoly(mat):
    """Exact characteristic polynomial coefficients (leading 1 first) by
    Faddeev-LeVerrier over rationals."""
    n = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    coeffs = [Fraction(1)]
    m = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        am = [[sum(a[i][t] * m[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        m = [[am[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        amk = [[sum(a[i][t] * m[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(amk[i][i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


def singular_values_charpoly(a):
    """Singular values from the roots of det(lambda I - A^T A), computed
    with exact rational arithmetic and high-precision root finding."""
    a = np.asarray(a, dtype=float)
    if a.shape[0] < a.shape[1]:
        a = a.T
    exact = [[Fraction(float(x)) for x in row] for row in a]
    n = a.shape[1]
    gram = [[sum(exact[t][i] * exact[t][j] for t in range(a.shape[0])) for j in range(n)] for i in range(n)]
    coeffs = charpoly(gram)
    with mpmath.workdps(60):
        if all(c == 0 for c in coeffs[1:]):
            roots = [mpmath.mpf(0)] * n
        else:
            roots = mpmath.polyroots([mpmath.mpf(c.numerator) / c.denominator for c in coeffs],
                                     maxsteps=500, extraprec=400)
        vals = sorted((float(mpmath.sqrt(abs(mpmath.re(r)))) for r in roots), reverse=True)
    return np.array(vals)


def prox_nuclear_grid_2x2_diag(d1, d2, delta, half_width=4.0, steps=801):
    """Brute-force minimizer of delta ||Z||_* + 0.5 ||Z - diag(d1, d2)||_F^2
    over diagonal Z on a grid (the minimizer is diagonal for diagonal input)."""
    grid1 = np.linspace(d1 - half_width, d1 + half_width, steps)
    grid2 = np.linspace(d2 - half_width, d2 + half_width, steps)
    z1, z2 = np.meshgrid(grid1, grid2, indexing="ij")
    obj = delta * (np.abs(z1) + np.abs(z2)) + 0.5 * ((z1 - d1) ** 2 + (z2 - d2) ** 2)
    i, j = np.unravel_index(np.argmin(obj), obj.shape)
    return np.diag([grid1[i], grid2[j]]), grid1[1] - grid1[0]


def prox_objective(z, x, delta):
    return delta * np.linalg.svd(z, compute_uv=False).sum() + 0.5 * np.linalg.norm(z - x) ** 2
