"""Third-order quaternion tensors under the gQt-product.

A tensor of size ``n1 x n2 x n3`` is an array of shape ``(n1, n2, n3, 4)``.
All production computations run in the transform domain: the tensor is
transformed along mode 3 (scale ``sqrt(n3)``), frontal slices are combined by
ordinary quaternion matrix algebra, and the result is transformed back.  The
block-circulant form is kept as a reference implementation for small sizes.
"""

from __future__ import annotations

import csv
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, RankOutOfRange
from .qdft import fft_mode, ifft_mode, make_plan, t_matrices
from .qlinalg import qm_conj_t, qm_identity, qm_mul, qm_singular_values, qsvd
from .quat import qmul_arrays

_MODE_PERM = {1: (1, 2, 0), 2: (0, 2, 1), 3: (0, 1, 2)}


def check_tensor(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 4 or A.shape[-1] != 4:
        raise DimensionMismatch(f"{name} must have shape (n1, n2, n3, 4), got {A.shape}")
    return A


def fro(A):
    return float(np.sqrt(np.sum(np.asarray(A, dtype=float) ** 2)))


# ------------------------------------------------------------ rearrangements

def unfold(A):
    """Stack the frontal slices vertically into an ``n1 n3 x n2`` matrix."""
    A = check_tensor(A)
    n1, n2, n3, _ = A.shape
    return np.transpose(A, (2, 0, 1, 3)).reshape(n3 * n1, n2, 4)


def fold(M, n1, n2, n3):
    """Inverse of :func:`unfold`."""
    M = np.asarray(M, dtype=float)
    if M.shape != (n1 * n3, n2, 4):
        raise DimensionMismatch(f"cannot fold {M.shape} into {n1}x{n2}x{n3}")
    return np.transpose(M.reshape(n3, n1, n2, 4), (1, 2, 0, 3))


def circ(A):
    """Block circulant matrix whose block ``(p, q)`` is slice ``(p - q) mod n3``.

    Accepts a quaternion tensor or a real ``(n1, n2, n3)`` array.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 4:
        A = check_tensor(A)
    elif A.ndim != 3:
        raise DimensionMismatch(f"cannot form circ of shape {A.shape}")
    n1, n2, n3 = A.shape[:3]
    out = np.zeros((n1 * n3, n2 * n3) + A.shape[3:])
    for p in range(n3):
        for q in range(n3):
            out[p * n1:(p + 1) * n1, q * n2:(q + 1) * n2] = A[:, :, (p - q) % n3]
    return out


def block_diag(A):
    """Block diagonal matrix with the frontal slices on the diagonal."""
    A = check_tensor(A)
    n1, n2, n3, _ = A.shape
    out = np.zeros((n1 * n3, n2 * n3, 4))
    for l in range(n3):
        out[l * n1:(l + 1) * n1, l * n2:(l + 1) * n2] = A[:, :, l]
    return out


def slices(A):
    """Frontal slices as a batch ``(n3, n1, n2, 4)``."""
    return np.transpose(A, (2, 0, 1, 3))


def from_slices(S):
    """Inverse of :func:`slices`."""
    return np.transpose(S, (1, 2, 0, 3))


def to_mode(A, w):
    """Permute axes so that mode ``w`` becomes the third axis.

    Frontal slices of the result are ``A(l,:,:)`` for ``w = 1`` and
    ``A(:,l,:)`` for ``w = 2``.
    """
    return np.transpose(A, _MODE_PERM[w] + (3,))


def from_mode(A, w):
    return np.transpose(A, tuple(np.argsort(_MODE_PERM[w])) + (3,))


# ------------------------------------------------------------ transforms

def transform(A, mu):
    """Mode-3 transform with the ``sqrt(n3)`` scale."""
    A = check_tensor(A)
    return fft_mode(A, 3, make_plan(mu, A.shape[2]), scaled=True)


def inverse_transform(A_hat, mu):
    A_hat = check_tensor(A_hat)
    return ifft_mode(A_hat, 3, make_plan(mu, A_hat.shape[2]), scaled=True)


def transformed_slices(A, mu):
    return slices(transform(A, mu))


def tensor_from_transformed_slices(S, mu):
    return inverse_transform(from_slices(S), mu)


# ------------------------------------------------------------ products

def gqt_product(A, B, mu):
    """gQt-product computed slice by slice in the transform domain."""
    A = check_tensor(A, "A")
    B = check_tensor(B, "B")
    if A.shape[1] != B.shape[0] or A.shape[2] != B.shape[2]:
        raise DimensionMismatch(f"incompatible shapes {A.shape[:3]} and {B.shape[:3]}")
    C_hat = qm_mul(transformed_slices(A, mu), transformed_slices(B, mu))
    return tensor_from_transformed_slices(C_hat, mu)


def _kron_identity(T, r):
    n = T.shape[0]
    out = np.zeros((n * r, n * r, 4))
    for p in range(n):
        for q in range(n):
            out[p * r:(p + 1) * r, q * r:(q + 1) * r] = T[p, q][None, None, :] * np.eye(r)[..., None]
    return out


def gqt_product_oracle(A, B, mu):
    """gQt-product evaluated literally from its block-circulant definition.

    Dense in ``n3``; intended for small sizes only.
    """
    A = check_tensor(A, "A")
    B = check_tensor(B, "B")
    n1, r, n3, _ = A.shape
    if B.shape[0] != r or B.shape[2] != n3:
        raise DimensionMismatch(f"incompatible shapes {A.shape[:3]} and {B.shape[:3]}")
    n2 = B.shape[1]
    units = np.eye(4)
    M = np.zeros((n1 * n3, r * n3, 4))
    M[..., 0] = circ(A[..., 0])
    for c, T in zip((1, 2, 3), t_matrices(mu, n3)):
        part = circ(A[..., c])
        real_block = np.zeros(part.shape + (4,))
        real_block[..., 0] = part
        prod = qm_mul(real_block, _kron_identity(T, r))
        M += qmul_arrays(units[c], prod)
    return fold(qm_mul(M, unfold(B)), n1, n2, n3)


def gqt_product_mode(A, B, mu, w):
    """Product along mode ``w``.

    Shapes: ``w = 3``: ``(n1,r,n3) x (r,n2,n3)``; ``w = 2``:
    ``(n1,n2,r) x (r,n2,n3)``; ``w = 1``: ``(n1,n2,r) x (n1,r,n3)``.
    The result is always ``n1 x n2 x n3``.
    """
    if w not in (1, 2, 3):
        raise ValueError("w must be 1, 2 or 3")
    return from_mode(gqt_product(to_mode(A, w), to_mode(B, w), mu), w)


def conj_transpose(A, mu):
    """Conjugate transpose: per-slice conjugate transpose in the transform domain."""
    return tensor_from_transformed_slices(qm_conj_t(transformed_slices(A, mu)), mu)


def identity_tensor(n, l):
    I = np.zeros((n, n, l, 4))
    I[np.arange(n), np.arange(n), 0, 0] = 1.0
    return I


def is_unitary(U, mu, tol=1e-8):
    """True when every transformed slice of square ``U`` is unitary within ``tol``."""
    U = check_tensor(U, "U")
    if U.shape[0] != U.shape[1]:
        return False
    S = transformed_slices(U, mu)
    eye = qm_identity(U.shape[0])
    a = qm_mul(qm_conj_t(S), S) - eye
    b = qm_mul(S, qm_conj_t(S)) - eye
    return bool(max(np.abs(a).max(), np.abs(b).max()) <= tol)


# ------------------------------------------------------------ SVD and ranks

class GqtSvd(NamedTuple):
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    sigma: np.ndarray  # (min(n1, n2), n3) transform-domain singular values


def _svd_slices(A, mu):
    S_hat = transformed_slices(check_tensor(A), mu)
    return S_hat, [qsvd(S_hat[l]) for l in range(S_hat.shape[0])]


def gqt_svd(A, mu):
    """Factor ``A = U * S * V^*`` with unitary U, V and f-diagonal S."""
    A = check_tensor(A)
    n1, n2, n3, _ = A.shape
    k = min(n1, n2)
    _, parts = _svd_slices(A, mu)
    U_hat = np.stack([p.U for p in parts])
    V_hat = np.stack([p.V for p in parts])
    sigma = np.stack([p.sigma for p in parts], axis=1)
    S_hat = np.zeros((n3, n1, n2, 4))
    S_hat[:, np.arange(k), np.arange(k), 0] = sigma.T
    return GqtSvd(tensor_from_transformed_slices(U_hat, mu),
                  tensor_from_transformed_slices(S_hat, mu),
                  tensor_from_transformed_slices(V_hat, mu),
                  sigma)


def transform_singular_values(A, mu):
    """Per-slice transform-domain singular values, shape ``(min(n1,n2), n3)``."""
    return qm_singular_values(transformed_slices(check_tensor(A), mu)).T


def _default_tol(shape, smax):
    return max(shape) * np.finfo(float).eps * smax


def gqt_rank(A, mu, tol=None):
    """Number of singular fibers with some entry above ``tol``."""
    A = check_tensor(A)
    s = transform_singular_values(A, mu)
    if s.size == 0:
        return 0
    if tol is None:
        tol = _default_tol(A.shape[:2], float(s.max()))
    return int(np.sum(s.max(axis=1) > tol))


def singular_values(A, mu):
    """``sigma_i = (1/n3) * sum_l sigma_hat_i^(l)``."""
    A = check_tensor(A)
    return transform_singular_values(A, mu).sum(axis=1) / A.shape[2]


def nuclear_norm(A, mu):
    return float(np.sum(singular_values(A, mu)))


def truncate(A, mu, k):
    """Best approximation of gQt-rank at most ``k``."""
    A = check_tensor(A)
    n1, n2, n3, _ = A.shape
    if not 1 <= k <= min(n1, n2):
        raise RankOutOfRange(f"k={k} outside [1, {min(n1, n2)}]")
    _, parts = _svd_slices(A, mu)
    out = []
    for p in parts:
        Us = p.U[:, :k] * p.sigma[None, :k, None]
        out.append(qm_mul(Us, qm_conj_t(p.V[:, :k])))
    return tensor_from_transformed_slices(np.stack(out), mu)


class MultiGqtRank(NamedTuple):
    r1: int
    r2: int
    r3: int


def singular_value_profile(A, mu, w):
    """Singular values of every mode-``w`` transformed slice, ``(n_w, k)``."""
    A = check_tensor(A)
    return qm_singular_values(transformed_slices(to_mode(A, w), mu))


def multi_gqt_rank(A, mu, tol=None):
    """Largest slice rank in each of the three mode-w transform domains."""
    A = check_tensor(A)
    ranks = []
    for w in (1, 2, 3):
        s = singular_value_profile(A, mu, w)
        if s.size == 0:
            ranks.append(0)
            continue
        t = tol
        if t is None:
            t = _default_tol(to_mode(A, w).shape[:2], float(s.max()))
        ranks.append(int(np.max(np.sum(s > t, axis=1))))
    return MultiGqtRank(*ranks)


def write_profile_csv(A, mu, path, modes=(1, 2, 3)):
    """Write ``mode, slice_index, sv_index, value`` rows for each mode."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["mode", "slice_index", "sv_index", "value"])
        for w in modes:
            prof = singular_value_profile(A, mu, w)
            for l, row in enumerate(prof):
                for i, v in enumerate(row):
                    wr.writerow([w, l, i, repr(float(v))])
