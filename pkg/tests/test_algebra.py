import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import mu_set, rand_mu, rand_q, rel_err
from gqt.algebra import (_kron_identity, block_diag, circ, conj_transpose, fold, fro, gqt_product,
                         gqt_product_mode, gqt_product_oracle, gqt_rank, gqt_svd, identity_tensor,
                         is_unitary, multi_gqt_rank, nuclear_norm, singular_value_profile,
                         singular_values, transform, transformed_slices, truncate, unfold,
                         write_profile_csv)
from gqt.errors import DimensionMismatch, RankOutOfRange
from gqt.qdft import t_matrices
from gqt.qlinalg import qm_conj_t, qm_mul, qm_nuclear_norm
from gqt.quat import MU_I, MU_SYM, qmul_arrays


def real_part_only(R):
    out = np.zeros(R.shape + (4,))
    out[..., 0] = R
    return out


def real_ct(X):
    """Transpose each slice and reverse slices 2..n of a real tensor."""
    n3 = X.shape[2]
    return np.transpose(X, (1, 0, 2))[:, :, [0] + list(range(n3 - 1, 0, -1))]


def conj_transpose_by_definition(A, mu):
    n1, n2, n3, _ = A.shape
    out = unfold(real_part_only(real_ct(A[..., 0])))
    for c, T in zip((1, 2, 3), t_matrices(mu, n3)):
        R = unfold(real_part_only(real_ct(A[..., c])))
        out = out - qmul_arrays(qm_mul(_kron_identity(qm_conj_t(T), n2), R), np.eye(4)[c])
    return fold(out, n2, n1, n3)


def classical_t_product(A, B):
    """Circular convolution of frontal slices for real tensors."""
    n3 = A.shape[2]
    C = np.zeros((A.shape[0], B.shape[1], n3))
    for k in range(n3):
        for l in range(n3):
            C[:, :, k] += A[:, :, (k - l) % n3] @ B[:, :, l]
    return C


def test_rearrangements(rng):
    A = rand_q(rng, 2, 3, 1)
    np.testing.assert_array_equal(circ(A), A[:, :, 0])
    np.testing.assert_array_equal(unfold(A), A[:, :, 0])
    A = rand_q(rng, 2, 3, 3)
    C = circ(A)
    n1 = 2
    np.testing.assert_array_equal(C[:, :3], np.concatenate([A[:, :, 0], A[:, :, 1], A[:, :, 2]]))
    np.testing.assert_array_equal(C[:, 3:6], np.concatenate([A[:, :, 2], A[:, :, 0], A[:, :, 1]]))
    np.testing.assert_array_equal(fold(unfold(A), 2, 3, 3), A)
    np.testing.assert_array_equal(block_diag(A)[n1:2 * n1, 3:6], A[:, :, 1])
    with pytest.raises(DimensionMismatch):
        fold(unfold(A), 3, 3, 3)


def test_product_matches_definition_many_instances(rng):
    worst = 0.0
    for mu in mu_set(rng, 5):
        for _ in range(10):
            n1, n2, r = rng.integers(1, 5, 3)
            n3 = rng.integers(1, 6)
            A, B = rand_q(rng, n1, r, n3), rand_q(rng, r, n2, n3)
            worst = max(worst, rel_err(gqt_product(A, B, mu), gqt_product_oracle(A, B, mu)))
    assert worst <= 1e-10


def test_product_examples(rng):
    mu = rand_mu(rng)
    A = rand_q(rng, 3, 4, 5)
    np.testing.assert_allclose(gqt_product(identity_tensor(3, 5), A, mu), A, atol=1e-12)
    np.testing.assert_allclose(gqt_product(A, identity_tensor(4, 5), mu), A, atol=1e-12)
    A1, B1 = rand_q(rng, 3, 2, 1), rand_q(rng, 2, 4, 1)
    np.testing.assert_allclose(gqt_product(A1, B1, mu)[:, :, 0], qm_mul(A1[:, :, 0], B1[:, :, 0]), atol=1e-12)
    assert np.all(gqt_product_oracle(rand_q(rng, 2, 3, 4), np.zeros((3, 2, 4, 4)), mu) == 0)
    with pytest.raises(DimensionMismatch):
        gqt_product(rand_q(rng, 2, 3, 4), rand_q(rng, 2, 3, 4), mu)


def test_reduces_to_classical_t_product(rng):
    for _ in range(20):
        n1, n2, r = rng.integers(1, 5, 3)
        n3 = rng.integers(1, 6)
        A = real_part_only(rng.standard_normal((n1, r, n3)))
        B = real_part_only(rng.standard_normal((r, n2, n3)))
        ref = real_part_only(classical_t_product(A[..., 0], B[..., 0]))
        assert rel_err(gqt_product(A, B, MU_I), ref) <= 1e-10
        assert rel_err(gqt_product_oracle(A, B, MU_I), ref) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_group_laws(seed):
    rng = np.random.default_rng(seed)
    mu = rand_mu(rng)
    n3 = int(rng.integers(1, 6))
    A, B, C = rand_q(rng, 2, 3, n3), rand_q(rng, 3, 4, n3), rand_q(rng, 4, 2, n3)
    lhs = gqt_product(gqt_product(A, B, mu), C, mu)
    rhs = gqt_product(A, gqt_product(B, C, mu), mu)
    assert rel_err(lhs, rhs) <= 1e-10
    B2 = rand_q(rng, 3, 4, n3)
    assert rel_err(gqt_product(A, B + B2, mu), gqt_product(A, B, mu) + gqt_product(A, B2, mu)) <= 1e-10
    lhs = conj_transpose(gqt_product(A, B, mu), mu)
    rhs = gqt_product(conj_transpose(B, mu), conj_transpose(A, mu), mu)
    assert rel_err(lhs, rhs) <= 1e-10


def test_conj_transpose_definition_and_slices(rng):
    for mu in mu_set(rng, 4):
        A = rand_q(rng, 3, 2, 4)
        At = conj_transpose(A, mu)
        assert At.shape == (2, 3, 4, 4)
        assert rel_err(At, conj_transpose_by_definition(A, mu)) <= 1e-12
        np.testing.assert_allclose(transformed_slices(At, mu), qm_conj_t(transformed_slices(A, mu)), atol=1e-10)
        np.testing.assert_allclose(conj_transpose(At, mu), A, atol=1e-11)
    A = rand_q(rng, 3, 2, 1)
    np.testing.assert_allclose(conj_transpose(A, MU_SYM)[:, :, 0], qm_conj_t(A[:, :, 0]), atol=1e-15)


def test_conj_transpose_worked_example_mu_i(rng):
    """Slices of A* for mu = i, n3 = 3: e and i parts read slices (1, 3, 2),
    j and k parts read slices (1, 2, 3); every part is transposed and negated
    except the real one."""
    A = rand_q(rng, 3, 2, 3)
    At = conj_transpose(A, MU_I)
    e_i_order = [0, 2, 1]
    j_k_order = [0, 1, 2]
    for l in range(3):
        expect = np.zeros((2, 3, 4))
        expect[..., 0] = A[:, :, e_i_order[l], 0].T
        expect[..., 1] = -A[:, :, e_i_order[l], 1].T
        expect[..., 2] = -A[:, :, j_k_order[l], 2].T
        expect[..., 3] = -A[:, :, j_k_order[l], 3].T
        np.testing.assert_allclose(At[:, :, l], expect, atol=1e-12)


def test_identity_and_unitary(rng):
    mu = rand_mu(rng)
    I = identity_tensor(2, 3)
    A = rand_q(rng, 2, 4, 3)
    np.testing.assert_allclose(gqt_product(I, A, mu), A, atol=1e-12)
    assert is_unitary(I, mu)
    assert not is_unitary(2 * I, mu)
    assert not is_unitary(rand_q(rng, 2, 3, 3), mu)


def check_svd(A, mu, recon_tol=1e-8):
    U, S, V, sig = gqt_svd(A, mu)
    R = gqt_product(gqt_product(U, S, mu), conj_transpose(V, mu), mu)
    assert rel_err(R, A) <= recon_tol
    assert abs(fro(A) - fro(S)) <= 1e-9 * max(fro(A), 1e-300)
    assert is_unitary(U, mu, 1e-8) and is_unitary(V, mu, 1e-8)
    S_hat = transformed_slices(S, mu)
    off = S_hat.copy()
    k = min(A.shape[:2])
    off[:, np.arange(k), np.arange(k), :] = 0
    assert np.abs(off).max() <= 1e-10 * max(1.0, np.abs(S_hat).max())
    return U, S, V, sig


def test_gqt_svd_random(rng):
    for _ in range(10):
        mu = rand_mu(rng)
        A = rand_q(rng, *rng.integers(1, 6, 3))
        U, S, V, sig = check_svd(A, mu)
        B = rand_q(rng, U.shape[1], 3, A.shape[2])
        assert abs(fro(gqt_product(U, B, mu)) - fro(B)) <= 1e-10 * fro(B)


def test_gqt_svd_examples(rng):
    A = np.zeros((3, 2, 4, 4))
    A[0, 0, :, 0] = 3.0
    A[1, 1, :, 0] = 1.0
    U, S, V, sig = check_svd(A, MU_SYM)
    np.testing.assert_allclose(S, A, atol=1e-12)
    A1 = rand_q(rng, 3, 4, 1)
    _, _, _, sig = check_svd(A1, MU_SYM)
    from gqt.qlinalg import qsvd
    np.testing.assert_allclose(sig[:, 0], qsvd(A1[:, :, 0]).sigma, atol=1e-12)


def low_rank(rng, n1, n2, n3, k, mu):
    X, Y = rand_q(rng, n1, k, n3), rand_q(rng, n2, k, n3)
    return gqt_product(X, conj_transpose(Y, mu), mu), X, Y


def test_rank_and_nuclear_norm(rng):
    mu = MU_SYM
    Z = np.zeros((3, 4, 2, 4))
    assert gqt_rank(Z, mu) == 0 and nuclear_norm(Z, mu) == 0.0
    assert gqt_rank(identity_tensor(3, 4), mu) == 3
    assert nuclear_norm(identity_tensor(3, 4), mu) == pytest.approx(3.0, abs=1e-12)
    for _ in range(5):
        A, X, Y = low_rank(rng, 5, 4, 3, 2, mu)
        assert gqt_rank(A, mu) == 2
        assert nuclear_norm(A, mu) <= 0.5 * (fro(X) ** 2 + fro(Y) ** 2) + 1e-8
        direct = sum(qm_nuclear_norm(s) for s in transformed_slices(A, mu)) / A.shape[2]
        assert abs(nuclear_norm(A, mu) - direct) <= 1e-9 * direct
        np.testing.assert_allclose(np.sum(singular_values(A, mu)), nuclear_norm(A, mu))


def test_truncate(rng):
    mu = rand_mu(rng)
    A = rand_q(rng, 4, 3, 5)
    np.testing.assert_allclose(truncate(A, mu, 3), A, atol=1e-9)
    B, _, _ = low_rank(rng, 4, 5, 3, 2, mu)
    assert rel_err(truncate(B, mu, 2), B) <= 1e-9
    A1 = truncate(A, mu, 1)
    assert gqt_rank(A1, mu) <= 1
    sig = gqt_svd(A, mu).sigma
    discarded = np.sum(sig[1:] ** 2) / A.shape[2]
    assert abs(fro(A - A1) ** 2 - discarded) <= 1e-8 * fro(A) ** 2
    assert abs(fro(A - A1) ** 2 - (fro(A) ** 2 - fro(A1) ** 2)) <= 1e-8 * fro(A) ** 2
    with pytest.raises(RankOutOfRange):
        truncate(A, mu, 0)
    with pytest.raises(RankOutOfRange):
        truncate(A, mu, 4)


def test_mode_products(rng):
    mu = rand_mu(rng)
    A, B = rand_q(rng, 2, 3, 4), rand_q(rng, 3, 5, 4)
    np.testing.assert_array_equal(gqt_product_mode(A, B, mu, 3), gqt_product(A, B, mu))
    # mode 1: slices A(l,:,:) (n2 x r) times B(l,:,:) (r x n3)
    n1, n2, n3, r = 3, 4, 5, 2
    A, B = rand_q(rng, n1, n2, r), rand_q(rng, n1, r, n3)
    C = gqt_product_mode(A, B, mu, 1)
    assert C.shape == (n1, n2, n3, 4)
    from gqt.qdft import fft_mode, make_plan
    p = make_plan(mu, n1)
    Ch, Ah, Bh = (fft_mode(T, 1, p, scaled=True) for T in (C, A, B))
    for l in range(n1):
        np.testing.assert_allclose(Ch[l], qm_mul(Ah[l], Bh[l]), atol=1e-10)
    # mode 2: slices A(:,j,:) (n1 x r) times B(:,j,:) (r x n3)
    A, B = rand_q(rng, n1, n2, r), rand_q(rng, r, n2, n3)
    C = gqt_product_mode(A, B, mu, 2)
    p = make_plan(mu, n2)
    Ch, Ah, Bh = (fft_mode(T, 2, p, scaled=True) for T in (C, A, B))
    for j in range(n2):
        np.testing.assert_allclose(Ch[:, j], qm_mul(Ah[:, j], Bh[:, j]), atol=1e-10)
    # identity along mode 1: A(l,:,:) slices are n2 x n3, identity n3 x n3 with n1 frontal "slices"
    A = rand_q(rng, 3, 4, 5)
    I1 = np.transpose(identity_tensor(5, 3), (2, 0, 1, 3))
    np.testing.assert_allclose(gqt_product_mode(A, I1, mu, 1), A, atol=1e-12)
    # rank bound along mode 1
    A = rand_q(rng, 4, 5, 2)
    B = rand_q(rng, 4, 2, 6)
    r1 = multi_gqt_rank(gqt_product_mode(A, B, mu, 1), mu).r1
    assert r1 <= min(multi_gqt_rank(A, mu).r1, multi_gqt_rank(B, mu).r1)
    assert r1 == 2


def test_multi_rank(rng):
    mu = MU_SYM
    assert multi_gqt_rank(np.zeros((3, 4, 5, 4)), mu) == (0, 0, 0)
    for _ in range(5):
        A = rand_q(rng, 4, 3, 5)
        assert multi_gqt_rank(A, mu).r3 == gqt_rank(A, mu)
    assert singular_value_profile(A, mu, 1).shape == (4, 3)
    assert singular_value_profile(A, mu, 2).shape == (3, 4)
    assert singular_value_profile(A, mu, 3).shape == (5, 3)


def test_profile_csv(tmp_path, rng):
    A = rand_q(rng, 3, 2, 2)
    path = tmp_path / "sv.csv"
    write_profile_csv(A, MU_SYM, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "mode,slice_index,sv_index,value"
    assert len(lines) == 1 + 3 * 2 + 2 * 2 + 2 * 2
