import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rand_q, rel_err
from gqt.errors import DimensionMismatch, NotPositiveDefinite
from gqt.qlinalg import (hermitian_solve, qm_conj_t, qm_fro, qm_identity, qm_mul, qm_nuclear_norm,
                         qm_rank, qsvd, to_complex_adjoint)
from gqt.quat import Quaternion, qmul


def naive_mul(A, B):
    """Triple loop over scalar Hamilton products."""
    m, n = A.shape[:2]
    p = B.shape[1]
    out = np.zeros((m, p, 4))
    for i in range(m):
        for k in range(p):
            acc = Quaternion()
            for j in range(n):
                acc = acc + qmul(Quaternion.from_array(A[i, j]), Quaternion.from_array(B[j, k]))
            out[i, k] = acc.as_array()
    return out


def diag_sigma(m, n, s):
    S = np.zeros((m, n, 4))
    S[np.arange(len(s)), np.arange(len(s)), 0] = s
    return S


def recon(U, s, V):
    return qm_mul(qm_mul(U, diag_sigma(U.shape[0], V.shape[0], s)), qm_conj_t(V))


def test_product_matches_triple_loop(rng):
    A, B = rand_q(rng, 3, 2), rand_q(rng, 2, 4)
    np.testing.assert_allclose(qm_mul(A, B), naive_mul(A, B), atol=1e-13)


def test_product_small_cases(rng):
    A = rand_q(rng, 3, 3)
    np.testing.assert_allclose(qm_mul(qm_identity(3), A), A, atol=0)
    i = np.array([[[0, 1.0, 0, 0]]])
    j = np.array([[[0, 0, 1.0, 0]]])
    np.testing.assert_array_equal(qm_mul(i, j), [[[0, 0, 0, 1.0]]])
    with pytest.raises(DimensionMismatch):
        qm_mul(rand_q(rng, 2, 3), rand_q(rng, 2, 3))


def test_conj_transpose_of_product(rng):
    A, B = rand_q(rng, 3, 2), rand_q(rng, 2, 4)
    np.testing.assert_allclose(qm_conj_t(qm_mul(A, B)), qm_mul(qm_conj_t(B), qm_conj_t(A)), atol=1e-13)


def test_frobenius_trace_identity(rng):
    for _ in range(10):
        A = rand_q(rng, *rng.integers(1, 7, 2))
        f2 = float(qm_fro(A)) ** 2
        t1 = np.trace(qm_mul(A, qm_conj_t(A))[..., 0])
        t2 = np.trace(qm_mul(qm_conj_t(A), A)[..., 0])
        assert abs(t1 - f2) <= 1e-10 * f2 and abs(t2 - f2) <= 1e-10 * f2


def test_complex_adjoint_examples(rng):
    one = np.array([[[1.0, 0, 0, 0]]])
    np.testing.assert_array_equal(to_complex_adjoint(one), np.eye(2))
    j = np.array([[[0, 0, 1.0, 0]]])
    np.testing.assert_array_equal(to_complex_adjoint(j), [[0, 1], [-1, 0]])
    A, B = rand_q(rng, 2, 2), rand_q(rng, 2, 2)
    np.testing.assert_allclose(to_complex_adjoint(qm_mul(A, B)),
                               to_complex_adjoint(A) @ to_complex_adjoint(B), atol=1e-13)


def test_qsvd_examples():
    A = np.zeros((2, 2, 4))
    A[0, 0, 0], A[1, 1, 0] = 3.0, 1.0
    U, s, V = qsvd(A)
    np.testing.assert_allclose(s, [3.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(recon(U, s, V), A, atol=1e-14)
    U, s, V = qsvd(np.array([[[0, 1.0, 0, 0]]]))
    np.testing.assert_allclose(s, [1.0], atol=1e-15)


def test_qsvd_column_phase_convention(rng):
    U, _, _ = qsvd(rand_q(rng, 5, 3))
    for c in range(U.shape[1]):
        mag = np.sum(U[:, c] ** 2, axis=-1)
        t = np.argmax(mag)
        assert U[t, c, 0] > 0 and np.allclose(U[t, c, 1:], 0.0, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1), st.sampled_from(["full", "low", "dup"]))
def test_qsvd_properties(m, n, seed, kind):
    rng = np.random.default_rng(seed)
    if kind == "full":
        A = rand_q(rng, m, n)
    elif kind == "low":
        r = int(rng.integers(1, min(m, n) + 1))
        A = qm_mul(rand_q(rng, m, r), rand_q(rng, r, n))
    else:  # repeated singular values
        U, _, V = qsvd(rand_q(rng, m, n))
        s = np.ones(min(m, n))
        A = recon(U, s, V)
    U, s, V = qsvd(A)
    assert np.abs(qm_mul(U, qm_conj_t(U)) - qm_identity(m)).max() <= 1e-9
    assert np.abs(qm_mul(V, qm_conj_t(V)) - qm_identity(n)).max() <= 1e-9
    assert rel_err(recon(U, s, V), A) <= 1e-9
    assert np.all(np.diff(s) <= 1e-12 * max(1.0, s[0])) and np.all(s >= 0)
    cs = np.linalg.svd(to_complex_adjoint(A), compute_uv=False)
    np.testing.assert_allclose(s, cs[0::2][:len(s)], atol=1e-9 * max(1.0, cs[0]))
    np.testing.assert_allclose(s, cs[1::2][:len(s)], atol=1e-9 * max(1.0, cs[0]))


def test_nuclear_norm_examples(rng):
    assert qm_nuclear_norm(qm_identity(4)) == pytest.approx(4.0, abs=1e-12)
    u = rand_q(rng, 4, 1)
    v = rand_q(rng, 3, 1)
    u /= qm_fro(u)
    v /= qm_fro(v)
    assert qm_nuclear_norm(qm_mul(u, qm_conj_t(v))) == pytest.approx(1.0, abs=1e-12)


def test_nuclear_norm_variational_bound(rng):
    """Every factorization A = X Y* costs at least ||A||_*; the SVD split attains it."""
    for _ in range(10):
        A = rand_q(rng, 3, 3)
        U, s, V = qsvd(A)
        nuc = qm_nuclear_norm(A)
        root = np.sqrt(s)
        X0 = U * root[None, :, None]
        Y0 = V * root[None, :, None]
        assert rel_err(qm_mul(X0, qm_conj_t(Y0)), A) < 1e-12
        assert 0.5 * (qm_fro(X0) ** 2 + qm_fro(Y0) ** 2) == pytest.approx(nuc, abs=1e-8)
        for _ in range(20):
            # random invertible mixing G: X = X0 G, Y = Y0 G^{-*}
            G = rand_q(rng, 3, 3) + 3 * qm_identity(3)
            Ginv_h = qm_conj_t(hermitian_solve(qm_mul(qm_conj_t(G), G), qm_conj_t(G)))
            # (G* G)^{-1} G* = G^{-1}, so Ginv_h = G^{-*}
            X = qm_mul(X0, G)
            Y = qm_mul(Y0, Ginv_h)
            assert rel_err(qm_mul(X, qm_conj_t(Y)), A) < 1e-9
            assert 0.5 * (qm_fro(X) ** 2 + qm_fro(Y) ** 2) >= nuc - 1e-8


def test_rank(rng):
    A = qm_mul(rand_q(rng, 5, 2), rand_q(rng, 2, 6))
    assert qm_rank(A) == 2
    assert qm_rank(np.zeros((3, 3, 4))) == 0


def test_hermitian_solve_examples(rng):
    B = rand_q(rng, 3, 2)
    np.testing.assert_allclose(hermitian_solve(qm_identity(3), B), B, atol=0)
    np.testing.assert_allclose(hermitian_solve(2 * qm_identity(3), qm_identity(3)), qm_identity(3) / 2, atol=0)


def test_hermitian_solve_residual_batched(rng):
    for n in range(1, 8):
        G = rand_q(rng, 4, n, n)
        H = qm_mul(qm_conj_t(G), G) + qm_identity(n)
        B = rand_q(rng, 4, n, 3)
        X = hermitian_solve(H, B)
        assert qm_fro(qm_mul(H, X) - B).max() <= 1e-10 * qm_fro(B).min()
        # oracle: complex adjoint solve
        Y = np.linalg.solve(to_complex_adjoint(H), to_complex_adjoint(B))
        np.testing.assert_allclose(to_complex_adjoint(X), Y, atol=1e-10)


def test_hermitian_solve_rejects_indefinite():
    H = qm_identity(2)
    H[1, 1, 0] = -1.0
    with pytest.raises(NotPositiveDefinite):
        hermitian_solve(H, qm_identity(2))
