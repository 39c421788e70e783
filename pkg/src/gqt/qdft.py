"""Quaternion discrete Fourier transform with a pure unit axis ``mu``.

The normalized transform matrix is ``F = C - mu S`` with real cosine and sine
tables ``C`` and ``S``.  Fibers are transformed by left multiplication.

Two execution paths are provided.  The dense path multiplies by ``C`` and
``S`` directly and serves as a reference.  The fast path writes every fiber
as ``q = c1 + nu c2`` with ``c1, c2`` in the commutative subfield ``R + R mu``
and ``nu`` a unit pure quaternion orthogonal to ``mu``.  Because
``mu nu = -nu mu`` the transform acts on ``c1`` with the ordinary kernel and
on ``c2`` with the conjugate kernel, so two complex FFTs suffice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch
from .qlinalg import qm_conj_t, qm_mul
from .quat import PureUnitQuaternion, mu_variants, qmul_arrays


@dataclass(frozen=True)
class QdftPlan:
    """Immutable tables for transforms of length ``n`` with axis ``mu``."""

    mu: PureUnitQuaternion
    n: int
    C: np.ndarray = field(repr=False, compare=False)
    S: np.ndarray = field(repr=False, compare=False)
    nu: PureUnitQuaternion = field(compare=False)

    @property
    def kappa(self):
        """The third basis axis ``mu nu`` (equal to the cross product)."""
        return np.cross(self.mu.vector, self.nu.vector)


def cos_sin_tables(n):
    p = np.arange(n)
    ang = 2.0 * np.pi * np.outer(p, p) / n
    s = 1.0 / np.sqrt(n)
    return np.cos(ang) * s, np.sin(ang) * s


def orthogonal_axis(mu):
    """Deterministic unit pure quaternion orthogonal to ``mu``."""
    m = mu.vector
    for e in (np.array([0.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0])):
        v = e - np.dot(e, m) * m
        if np.linalg.norm(v) >= 1e-6:
            return PureUnitQuaternion(*v)
    raise AssertionError("unreachable: mu cannot be parallel to both j and i")


@lru_cache(maxsize=256)
def _cached_plan(a, b, c, n):
    mu = PureUnitQuaternion(a, b, c)
    C, S = cos_sin_tables(n)
    C.setflags(write=False)
    S.setflags(write=False)
    return QdftPlan(mu, n, C, S, orthogonal_axis(mu))


def make_plan(mu, n):
    """Return the (cached) plan for ``mu`` and length ``n``."""
    n = int(n)
    if n < 1:
        raise ValueError("transform length must be positive")
    return _cached_plan(mu.a, mu.b, mu.c, n)


def qdft_matrix(mu, n):
    """Dense ``F_{mu,n}`` as an ``(n, n, 4)`` quaternion array."""
    C, S = cos_sin_tables(n)
    F = np.zeros((n, n, 4))
    F[..., 0] = C
    F[..., 1:] = -S[..., None] * mu.vector
    return F


def perm_matrix(n):
    """Real permutation fixing index 0 and reversing indices 1..n-1."""
    P = np.zeros((n, n))
    P[0, 0] = 1.0
    for i in range(1, n):
        P[i, n - i] = 1.0
    return P


def t_matrices(mu, n):
    """Coupling matrices ``T_x = F*_{mu_x} F_mu`` for ``x`` in ``i, j, k``."""
    F = qdft_matrix(mu, n)
    return tuple(qm_mul(qm_conj_t(qdft_matrix(v, n)), F) for v in mu_variants(mu))


def t_matrices_closed_form(mu, n):
    """Same matrices written as ``x I + (1 - x) P`` with ``x`` a quaternion."""
    I = np.zeros((n, n, 4))
    I[..., 0] = np.eye(n)
    P = np.zeros((n, n, 4))
    P[..., 0] = perm_matrix(n)
    out = []
    for v in mu_variants(mu):
        # 1/2 (1 - v mu) with v mu = -<v, mu> + v x mu
        vm = qmul_arrays(v.as_array(), mu.as_array())
        x = 0.5 * (np.array([1.0, 0, 0, 0]) - vm)
        y = np.array([1.0, 0, 0, 0]) - x
        out.append(qmul_arrays(x, I) + qmul_arrays(y, P))
    return tuple(out)


def default_scaled(mode):
    return mode == 3


def _resolve(T, mode, plan, scaled):
    T = np.asarray(T, dtype=float)
    if T.ndim != 4 or T.shape[-1] != 4:
        raise DimensionMismatch(f"expected a quaternion tensor (n1, n2, n3, 4), got {T.shape}")
    if mode not in (1, 2, 3):
        raise ValueError("mode must be 1, 2 or 3")
    if T.shape[mode - 1] != plan.n:
        raise DimensionMismatch(
            f"plan length {plan.n} does not match extent {T.shape[mode - 1]} along mode {mode}")
    if scaled is None:
        scaled = default_scaled(mode)
    return T, (np.sqrt(plan.n) if scaled else 1.0)


def _split(Q, plan):
    mu, nu, ka = plan.mu.vector, plan.nu.vector, plan.kappa
    v = Q[..., 1:]
    c1 = Q[..., 0] + 1j * (v @ mu)
    c2 = (v @ nu) - 1j * (v @ ka)
    return c1, c2


def _merge(c1, c2, plan):
    mu, nu, ka = plan.mu.vector, plan.nu.vector, plan.kappa
    out = np.empty(c1.shape + (4,))
    out[..., 0] = c1.real
    out[..., 1:] = (c1.imag[..., None] * mu + c2.real[..., None] * nu
                    - c2.imag[..., None] * ka)
    return out


def _transform(T, mode, plan, scaled, inverse, method):
    T, scale = _resolve(T, mode, plan, scaled)
    axis = mode - 1
    if method == "direct":
        Q = np.moveaxis(T, axis, -2)
        Cq = np.einsum("ab,...bq->...aq", plan.C, Q)
        Sq = np.einsum("ab,...bq->...aq", plan.S, Q)
        mSq = qmul_arrays(plan.mu.as_array(), Sq)
        R = Cq + mSq if inverse else Cq - mSq
        R = np.moveaxis(R, -2, axis)
    elif method == "fast":
        c1, c2 = _split(T, plan)
        fwd = lambda z: np.fft.fft(z, axis=axis, norm="ortho")
        bwd = lambda z: np.fft.ifft(z, axis=axis, norm="ortho")
        if inverse:
            R = _merge(bwd(c1), fwd(c2), plan)
        else:
            R = _merge(fwd(c1), bwd(c2), plan)
    else:
        raise ValueError(f"unknown method {method!r}")
    return R / scale if inverse else R * scale


def fft_mode(T, mode, plan, scaled=None, method="fast"):
    """Transform every mode-``mode`` fiber ``f`` into ``scale * F f``.

    ``scale`` is ``sqrt(n)`` when ``scaled`` is true, else 1.  By default
    mode 3 is scaled and modes 1 and 2 are not.
    """
    return _transform(T, mode, plan, scaled, False, method)


def ifft_mode(T, mode, plan, scaled=None, method="fast"):
    """Inverse of :func:`fft_mode` with the same ``scaled`` convention."""
    return _transform(T, mode, plan, scaled, True, method)
