import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from corutv.matcore import (
    ParameterError,
    RngSeed,
    ShapeError,
    Xoshiro256pp,
    as_matrix,
    gaussian,
    householder_qr,
    jacobi_svd,
    matmul,
    norm,
    pinv,
    qrcp,
    svd,
)
from corutv.testgen import gen_noisy_lowrank

from oracles import singular_values_charpoly, triple_loop_matmul

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def tall_matrices(max_rows=8, max_cols=6):
    return st.integers(1, max_cols).flatmap(
        lambda n: st.integers(n, max(n, max_rows)).flatmap(
            lambda m: arrays(np.float64, (m, n), elements=finite)))


# ---------------------------------------------------------------- as_matrix

def test_as_matrix_rejects_bad_input():
    with pytest.raises(ShapeError):
        as_matrix([1.0, 2.0])
    with pytest.raises(ShapeError):
        as_matrix(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        as_matrix([[np.inf]])


# ---------------------------------------------------------------- matmul

def test_matmul_identity():
    b = gaussian(3, 4, (1, 0))
    assert np.array_equal(matmul(np.eye(3), b), b)


def test_matmul_small_hand_case():
    assert np.array_equal(matmul([[1, 2], [3, 4]], [[0], [1]]), [[2.0], [4.0]])


def test_matmul_matches_triple_loop():
    a = gaussian(7, 5, (3, 0))
    b = gaussian(5, 3, (3, 1))
    assert np.max(np.abs(matmul(a, b) - triple_loop_matmul(a, b))) <= 1e-12


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32))
def test_matmul_relative_agreement(m, n, p, s):
    a = gaussian(m, n, (s, 0))
    b = gaussian(n, p, (s, 1))
    ref = triple_loop_matmul(a, b)
    scale = np.abs(a) @ np.abs(b)
    assert np.all(np.abs(matmul(a, b) - ref) <= 1e-12 * np.maximum(scale, 1e-300))


# ---------------------------------------------------------------- QR

def test_qr_identity():
    f = householder_qr(np.eye(4))
    assert np.allclose(np.abs(f.q), np.eye(4), atol=1e-15)
    assert np.allclose(np.abs(np.diag(f.r)), 1.0)


def test_qr_single_column():
    f = householder_qr([[3.0], [4.0]])
    assert abs(abs(f.r[0, 0]) - 5.0) < 1e-14
    assert np.allclose(np.abs(f.q[:, 0]), [0.6, 0.8], atol=1e-15)


def test_qr_gaussian_50x20():
    a = gaussian(50, 20, (5, 0))
    f = householder_qr(a)
    assert f.q.shape == (50, 20) and f.r.shape == (20, 20)
    assert np.linalg.norm(f.q.T @ f.q - np.eye(20)) <= 1e-12 * math.sqrt(20)
    assert np.linalg.norm(f.q @ f.r - a) <= 1e-12 * np.linalg.norm(a)
    assert np.all(np.tril(f.r, -1) == 0.0)


def test_qr_rejects_wide():
    with pytest.raises(ShapeError):
        householder_qr(np.ones((2, 3)))


def test_qr_rank_deficient_accepted():
    a = np.outer([1.0, 2.0, 3.0], [1.0, 1.0])
    f = householder_qr(a)
    assert np.linalg.norm(f.q @ f.r - a) <= 1e-12 * np.linalg.norm(a)
    assert abs(f.r[1, 1]) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(tall_matrices())
def test_qr_invariants_property(a):
    f = householder_qr(a)
    n = a.shape[1]
    scale = max(np.linalg.norm(a), 1e-300)
    assert np.linalg.norm(f.q @ f.r - a) <= 1e-10 * scale + 1e-300
    assert np.all(np.tril(f.r, -1) == 0.0)
    assert np.max(np.abs(f.q.T @ f.q - np.eye(n))) <= 1e-10 * math.sqrt(n)


# ---------------------------------------------------------------- QRCP

def test_qrcp_diagonal():
    f = qrcp(np.diag([1.0, 5.0, 3.0]))
    assert f.perm[0] == 1
    assert np.allclose(np.abs(np.diag(f.r)), [5.0, 3.0, 1.0])


def test_qrcp_rank_one():
    u = np.array([1.0, -2.0, 0.5, 3.0])
    v = np.array([2.0, 1.0, -1.0])
    a = np.outer(u, v)
    f = qrcp(a)
    assert abs(abs(f.r[0, 0]) - np.linalg.norm(u) * np.max(np.abs(v))) <= 1e-12 * np.linalg.norm(a)
    assert np.all(np.abs(np.diag(f.r)[1:]) <= 1e-10 * np.linalg.norm(a))


def test_qrcp_tie_breaks_to_lowest_index():
    f = qrcp(np.eye(3))
    assert list(f.perm) == [0, 1, 2]


def test_qrcp_gap_noisy_lowrank():
    a = gen_noisy_lowrank(100, 20, 0.01, (0, 0))
    d = np.abs(np.diag(qrcp(a).r))
    assert d[19] / d[20] >= 10


def test_qrcp_rejects_wide():
    with pytest.raises(ShapeError):
        qrcp(np.ones((2, 3)))


@settings(max_examples=60, deadline=None)
@given(tall_matrices())
def test_qrcp_invariants_property(a):
    f = qrcp(a)
    d = np.abs(np.diag(f.r))
    assert np.all(d[:-1] >= d[1:])
    assert sorted(f.perm) == list(range(a.shape[1]))
    scale = max(np.linalg.norm(a), 1e-300)
    assert np.linalg.norm(a @ f.permutation_matrix() - f.q @ f.r) <= 1e-10 * scale + 1e-300
    assert np.all(np.tril(f.r, -1) == 0.0)


# ---------------------------------------------------------------- SVD

@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_svd_diagonal_with_sign(method):
    f = svd(np.diag([3.0, -2.0]), method=method)
    assert np.allclose(f.sigma, [3.0, 2.0])
    assert np.allclose(np.abs(f.u), np.eye(2)) and np.allclose(np.abs(f.v), np.eye(2))
    assert np.allclose(f.reconstruct(), np.diag([3.0, -2.0]))


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_svd_zero_and_permutation(method):
    assert np.all(svd(np.zeros((3, 2)), method=method).sigma == 0.0)
    assert np.allclose(svd([[0.0, 1.0], [1.0, 0.0]], method=method).sigma, [1.0, 1.0])


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
@pytest.mark.parametrize("shape", [(1, 1), (1, 4), (4, 1), (2, 3), (3, 3), (4, 4), (4, 2)])
def test_svd_against_charpoly_oracle(method, shape):
    for s in range(5):
        a = gaussian(*shape, (100 + s, 7))
        ref = singular_values_charpoly(a)
        got = svd(a, method=method).sigma
        assert np.all(np.abs(got - ref) <= 1e-8 * ref[0])


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_svd_invariants(method):
    for shape in [(12, 7), (7, 12), (9, 9)]:
        a = gaussian(*shape, (11, 0))
        f = svd(a, method=method)
        r = min(shape)
        assert np.all(f.sigma[:-1] >= f.sigma[1:]) and np.all(f.sigma >= 0)
        assert np.linalg.norm(f.reconstruct() - a) <= 1e-9 * np.linalg.norm(a)
        assert np.max(np.abs(f.u.T @ f.u - np.eye(r))) <= 1e-10 * math.sqrt(r)
        assert np.max(np.abs(f.v.T @ f.v - np.eye(r))) <= 1e-10 * math.sqrt(r)


def test_jacobi_matches_lapack():
    a = gaussian(30, 20, (2, 2))
    assert np.allclose(jacobi_svd(a).sigma, svd(a).sigma, rtol=1e-12, atol=1e-13)
    assert jacobi_svd(a).converged


def test_jacobi_rank_deficient_bases_orthonormal():
    a = np.outer(np.arange(1.0, 6.0), np.ones(4))
    f = jacobi_svd(a)
    assert np.allclose(f.u.T @ f.u, np.eye(4), atol=1e-12)
    assert np.allclose(f.reconstruct(), a, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32))
def test_svd_charpoly_property(m, n, s):
    a = gaussian(m, n, (s, 3))
    ref = singular_values_charpoly(a)
    assert np.all(np.abs(svd(a).sigma - ref) <= 1e-8 * ref[0])


# ---------------------------------------------------------------- pinv

def test_pinv_examples():
    assert np.allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    q = householder_qr(gaussian(8, 3, (1, 1))).q
    assert np.max(np.abs(pinv(q) - q.T)) <= 1e-12
    assert np.array_equal(pinv(np.zeros((2, 3))), np.zeros((3, 2)))


def test_pinv_penrose_identities():
    a = gaussian(10, 6, (4, 4))
    x = pinv(a)
    tol = 1e-9 * np.linalg.norm(a)
    assert np.linalg.norm(a @ x @ a - a) <= tol
    assert np.linalg.norm(x @ a @ x - x) <= tol
    assert np.linalg.norm((a @ x).T - a @ x) <= tol
    assert np.linalg.norm((x @ a).T - x @ a) <= tol


# ---------------------------------------------------------------- RNG

def test_xoshiro_reference_vector():
    gen = Xoshiro256pp.from_state([1, 2, 3, 4])
    assert gen.fill_u64(4) == [41943041, 58720359, 3588806011781223, 3591011842654386]


def test_splitmix_seeding():
    from corutv.matcore import _splitmix64

    assert _splitmix64(0)[1] == 0xE220A8397B1DCDAF


def test_gaussian_sanity_and_determinism():
    g = gaussian(4, 4, (1, 0))
    assert abs(g.mean()) <= 1.0
    assert gaussian(4, 4, (1, 0)).tobytes() == g.tobytes()
    assert gaussian(4, 4, (1, 1)).tobytes() != g.tobytes()


def test_gaussian_moments():
    g = gaussian(100, 100, (42, 0))
    assert abs(g.mean()) <= 0.05
    assert 0.9 <= g.var() <= 1.1


def test_gaussian_prefix_stability():
    # row-major fill: a shorter draw is a prefix of a longer one
    a = gaussian(1, 7, (9, 9)).ravel()
    b = gaussian(1, 10, (9, 9)).ravel()
    assert np.array_equal(a, b[:7])


def test_uniforms_and_below_ranges():
    gen = Xoshiro256pp((5, 0))
    u = gen.uniforms(1000)
    assert np.all((u >= 0) & (u < 1))
    draws = [gen.below(7) for _ in range(700)]
    assert set(draws) == set(range(7))
    with pytest.raises(ParameterError):
        gen.below(0)


def test_rng_substream():
    assert RngSeed(3, 2**64 - 1).substream(1) == RngSeed(3, 0)


# ---------------------------------------------------------------- norms

def test_norm_examples():
    row = [[3.0, 4.0]]
    assert norm(row, "frobenius") == 5.0
    assert norm(row, "l1") == 7.0
    assert norm(row, "l0count") == 2
    assert norm(row, "spectral") == pytest.approx(5.0)
    assert norm(row, "nuclear") == pytest.approx(5.0)
    assert norm(np.eye(3), "nuclear") == pytest.approx(3.0)
    assert norm(np.eye(3), "spectral") == pytest.approx(1.0)
    d = np.diag([1.0, 2.0, 2.0])
    assert norm(d, "spectral") == pytest.approx(2.0)
    assert norm(d, "nuclear") == pytest.approx(5.0)
    assert norm(d, "frobenius") == pytest.approx(3.0)
    with pytest.raises(ParameterError):
        norm(d, "max")
