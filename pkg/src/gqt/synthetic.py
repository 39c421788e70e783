"""Seeded synthetic pure-quaternion tensors with known ranks."""

import numpy as np

from .algebra import gqt_product


def low_rank_tensor(shape, rank, mu, seed=0):
    """Pure tensor ``X *_mu Z`` with real ``X`` (n1 x r x n3) and pure ``Z`` (r x n2 x n3).

    A real left factor makes the product pure for every ``mu`` and the
    gQt-rank is ``rank`` for generic draws.
    """
    n1, n2, n3 = shape
    rng = np.random.default_rng(seed)
    X = np.zeros((n1, rank, n3, 4))
    X[..., 0] = rng.standard_normal((n1, rank, n3))
    Z = np.zeros((rank, n2, n3, 4))
    Z[..., 1:] = rng.standard_normal((rank, n2, n3, 3))
    M = gqt_product(X, Z, mu)
    M[..., 0] = 0.0  # rounding residue only
    return M


def multi_rank_tensor(shape, rank, seed=0):
    """Pure tensor of multilinear rank at most ``rank`` in every mode.

    Built from a pure ``rank^3`` core and real factor matrices; every
    mode-w transformed slice then has rank at most ``rank`` for any ``mu``.
    """
    n1, n2, n3 = shape
    rng = np.random.default_rng(seed)
    core = rng.standard_normal((rank, rank, rank, 3))
    U1 = rng.standard_normal((n1, rank))
    U2 = rng.standard_normal((n2, rank))
    U3 = rng.standard_normal((n3, rank))
    out = np.zeros((n1, n2, n3, 4))
    out[..., 1:] = np.einsum("abcq,ia,jb,kc->ijkq", core, U1, U2, U3)
    return out
