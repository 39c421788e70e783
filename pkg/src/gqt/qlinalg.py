"""Dense quaternion matrices.

A quaternion matrix of shape ``m x n`` is an array of shape ``(..., m, n, 4)``;
leading axes are treated as a batch.  Products are evaluated on the
complex-pair form ``A = A1 + A2 j`` with ``A1 = w + x i`` and ``A2 = y + z i``,
where ``j z = conj(z) j`` for complex ``z``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, NotPositiveDefinite
from .quat import from_pairs, to_pairs


def pair_matmul(A1, A2, B1, B2):
    """Product of complex-pair matrices ``(A1 + A2 j)(B1 + B2 j)``."""
    return (A1 @ B1 - A2 @ np.conj(B2),
            A1 @ B2 + A2 @ np.conj(B1))


def pair_conj_t(A1, A2):
    """Conjugate transpose in complex-pair form."""
    return np.conj(np.swapaxes(A1, -1, -2)), -np.swapaxes(A2, -1, -2)


def _check_matrix(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim < 3 or A.shape[-1] != 4:
        raise DimensionMismatch(f"{name} must have shape (..., m, n, 4), got {A.shape}")
    return A


def qm_mul(A, B):
    """Quaternion matrix product ``A B`` (batched over leading axes)."""
    A = _check_matrix(A, "A")
    B = _check_matrix(B, "B")
    if A.shape[-2] != B.shape[-3]:
        raise DimensionMismatch(f"inner dimensions differ: {A.shape[:-1]} @ {B.shape[:-1]}")
    return from_pairs(*pair_matmul(*to_pairs(A), *to_pairs(B)))


def qm_conj_t(A):
    """Conjugate transpose ``A*``."""
    A = _check_matrix(A)
    out = np.swapaxes(A, -2, -3).copy()
    out[..., 1:] *= -1.0
    return out


def qm_identity(n, batch=()):
    out = np.zeros(tuple(batch) + (n, n, 4))
    idx = np.arange(n)
    out[..., idx, idx, 0] = 1.0
    return out


def qm_fro(A):
    """Frobenius norm over the last three axes."""
    A = np.asarray(A, dtype=float)
    return np.sqrt(np.sum(A * A, axis=(-3, -2, -1)))


def to_complex_adjoint(A):
    """Complex adjoint ``[[A1, A2], [-conj(A2), conj(A1)]]``."""
    A = _check_matrix(A)
    A1, A2 = to_pairs(A)
    top = np.concatenate([A1, A2], axis=-1)
    bot = np.concatenate([-np.conj(A2), np.conj(A1)], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def qm_singular_values(A):
    """Singular values of each (batched) quaternion matrix, descending."""
    A = _check_matrix(A)
    m, n = A.shape[-3], A.shape[-2]
    k = min(m, n)
    if k == 0:
        return np.zeros(A.shape[:-3] + (0,))
    try:
        s = np.linalg.svd(to_complex_adjoint(A), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return s[..., 0:2 * k:2]


def qm_nuclear_norm(A):
    return np.sum(qm_singular_values(A), axis=-1)


def qm_rank(A, tol=None):
    s = qm_singular_values(A)
    if s.size == 0:
        return 0
    smax = float(s.max())
    if tol is None:
        tol = max(A.shape[-3], A.shape[-2]) * np.finfo(float).eps * smax
    return int(np.sum(s > tol))


class Qsvd(NamedTuple):
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray


def _orthonormal_extend(Q1, Q2, k, cand1, cand2, thresh):
    """Greedy Gram-Schmidt: append candidate columns to an orthonormal basis.

    ``Q1, Q2`` hold the basis in their first ``k`` columns and are filled in
    place.  A candidate is accepted when its residual after two projection
    passes exceeds ``thresh`` times its norm.  Returns the new column count.
    """
    m = Q1.shape[0]
    for t in range(cand1.shape[1]):
        if k == m:
            break
        v1 = cand1[:, t:t + 1].copy()
        v2 = cand2[:, t:t + 1].copy()
        n0 = np.sqrt(np.sum(np.abs(v1) ** 2 + np.abs(v2) ** 2))
        if n0 == 0.0:
            continue
        v1 /= n0
        v2 /= n0
        for _ in range(2):
            if k == 0:
                break
            B1, B2 = Q1[:, :k], Q2[:, :k]
            r1, r2 = pair_matmul(*pair_conj_t(B1, B2), v1, v2)
            p1, p2 = pair_matmul(B1, B2, r1, r2)
            v1 -= p1
            v2 -= p2
        nr = np.sqrt(np.sum(np.abs(v1) ** 2 + np.abs(v2) ** 2))
        if nr > thresh:
            Q1[:, k] = v1[:, 0] / nr
            Q2[:, k] = v2[:, 0] / nr
            k += 1
    return k


def _fill_basis(Q1, Q2, k):
    """Complete with standard basis vectors if candidates ran out."""
    m = Q1.shape[0]
    if k < m:
        eye = np.eye(m, dtype=complex)
        k = _orthonormal_extend(Q1, Q2, k, eye, np.zeros_like(eye), 1e-8)
    if k < m:
        raise ConvergenceFailure("could not complete an orthonormal basis")
    return k


def _phase_columns(Q1, Q2, cols):
    """Right-multiply each column by a unit quaternion so that its
    largest-magnitude entry becomes real positive.  Returns the phases."""
    phases = []
    for c in cols:
        mag = np.abs(Q1[:, c]) ** 2 + np.abs(Q2[:, c]) ** 2
        t = int(np.argmax(mag))
        a1, a2 = Q1[t, c], Q2[t, c]
        r = np.sqrt(mag[t])
        # p = conj(q_t) / |q_t| in pair form
        p1, p2 = np.conj(a1) / r, -a2 / r
        u1, u2 = Q1[:, c].copy(), Q2[:, c].copy()
        Q1[:, c] = u1 * p1 - u2 * np.conj(p2)
        Q2[:, c] = u1 * p2 + u2 * np.conj(p1)
        Q1[t, c] = Q1[t, c].real
        Q2[t, c] = 0.0
        phases.append((p1, p2))
    return phases


def qsvd(A):
    """Quaternion SVD ``A = U diag(sigma) V*``.

    The singular values are the doubled singular values of the complex
    adjoint taken once each.  Left singular vectors are read off the complex
    left singular vectors and orthonormalized over the quaternions; right
    singular vectors follow from ``v = A* u / sigma`` and are completed to a
    unitary matrix.  Each U column is normalized so that its largest entry
    is real positive.
    """
    A = _check_matrix(A)
    if A.ndim != 3:
        raise DimensionMismatch("qsvd expects a single matrix of shape (m, n, 4)")
    m, n = A.shape[0], A.shape[1]
    k = min(m, n)
    try:
        W, s, Zh = np.linalg.svd(to_complex_adjoint(A))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    sigma = s[0:2 * k:2].copy()
    smax = float(s[0]) if s.size else 0.0

    U1 = np.zeros((m, m), complex)
    U2 = np.zeros((m, m), complex)
    ku = _orthonormal_extend(U1, U2, 0, W[:m], -np.conj(W[m:]), 1e-6)
    _fill_basis(U1, U2, ku)
    _phase_columns(U1, U2, range(m))

    tol = max(m, n) * np.finfo(float).eps * smax
    r = int(np.sum(sigma > tol))
    A1, A2 = to_pairs(A)
    V1 = np.zeros((n, n), complex)
    V2 = np.zeros((n, n), complex)
    if r:
        c1, c2 = pair_matmul(*pair_conj_t(A1, A2), U1[:, :r], U2[:, :r])
        c1 = c1 / sigma[:r]
        c2 = c2 / sigma[:r]
        kv = _orthonormal_extend(V1, V2, 0, c1, c2, 1e-6)
        if kv != r:
            raise ConvergenceFailure("right singular vectors are not independent")
    Z = np.conj(Zh.T)
    kv = _orthonormal_extend(V1, V2, r, Z[:n], -np.conj(Z[n:]), 1e-6)
    _fill_basis(V1, V2, kv)
    _phase_columns(V1, V2, range(r, n))

    return Qsvd(from_pairs(U1, U2), sigma, from_pairs(V1, V2))


def _adjoint_solve(H1, H2, B1, B2):
    n = H1.shape[-1]
    top = np.concatenate([H1, H2], axis=-1)
    bot = np.concatenate([-np.conj(H2), np.conj(H1)], axis=-1)
    X = np.concatenate([top, bot], axis=-2)
    rhs = np.concatenate([B1, -np.conj(B2)], axis=-2)
    Y = np.linalg.solve(X, rhs)
    return Y[..., :n, :], -np.conj(Y[..., n:, :])


def hermitian_solve(H, B):
    """Solve ``H X = B`` for Hermitian positive definite ``H``.

    Uses a quaternion Cholesky factorization ``H = L L*`` with a real
    positive diagonal, batched over leading axes.  Raises
    NotPositiveDefinite if a pivot is not strictly positive; falls back to
    a complex-adjoint solve if a pivot is positive but underflows.
    """
    H = _check_matrix(H, "H")
    B = _check_matrix(B, "B")
    n = H.shape[-2]
    if H.shape[-3] != n:
        raise DimensionMismatch("H must be square")
    if B.shape[-3] != n:
        raise DimensionMismatch(f"B has {B.shape[-3]} rows, expected {n}")
    H1, H2 = to_pairs(H)
    B1, B2 = to_pairs(B)
    batch = np.broadcast_shapes(H.shape[:-3], B.shape[:-3])
    H1 = np.broadcast_to(H1, batch + (n, n))
    H2 = np.broadcast_to(H2, batch + (n, n))
    B1 = np.broadcast_to(B1, batch + B1.shape[-2:])
    B2 = np.broadcast_to(B2, batch + B2.shape[-2:])

    L1 = np.zeros(batch + (n, n), complex)
    L2 = np.zeros(batch + (n, n), complex)
    d = np.zeros(batch + (n,))
    tiny = np.finfo(float).tiny
    for j in range(n):
        r1, r2 = L1[..., j, :j], L2[..., j, :j]
        piv = H1[..., j, j].real - np.sum(np.abs(r1) ** 2 + np.abs(r2) ** 2, axis=-1)
        if not np.all(piv > 0.0):
            raise NotPositiveDefinite(f"non-positive pivot at column {j}")
        if np.any(piv < tiny):
            X1, X2 = _adjoint_solve(H1, H2, B1, B2)
            return from_pairs(X1, X2)
        d[..., j] = np.sqrt(piv)
        L1[..., j, j] = d[..., j]
        if j + 1 < n:
            s1, s2 = pair_matmul(L1[..., j + 1:, :j], L2[..., j + 1:, :j],
                                 *pair_conj_t(r1[..., None, :], r2[..., None, :]))
            L1[..., j + 1:, j] = (H1[..., j + 1:, j] - s1[..., 0]) / d[..., j, None]
            L2[..., j + 1:, j] = (H2[..., j + 1:, j] - s2[..., 0]) / d[..., j, None]

    # forward substitution L Y = B
    Y1 = np.array(B1, dtype=complex)
    Y2 = np.array(B2, dtype=complex)
    for i in range(n):
        if i:
            s1, s2 = pair_matmul(L1[..., i:i + 1, :i], L2[..., i:i + 1, :i],
                                 Y1[..., :i, :], Y2[..., :i, :])
            Y1[..., i, :] -= s1[..., 0, :]
            Y2[..., i, :] -= s2[..., 0, :]
        Y1[..., i, :] /= d[..., i, None]
        Y2[..., i, :] /= d[..., i, None]
    # back substitution L* X = Y
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            c1, c2 = L1[..., i + 1:, i:i + 1], L2[..., i + 1:, i:i + 1]
            s1, s2 = pair_matmul(*pair_conj_t(c1, c2), Y1[..., i + 1:, :], Y2[..., i + 1:, :])
            Y1[..., i, :] -= s1[..., 0, :]
            Y2[..., i, :] -= s2[..., 0, :]
        Y1[..., i, :] /= d[..., i, None]
        Y2[..., i, :] /= d[..., i, None]
    return from_pairs(Y1, Y2)
