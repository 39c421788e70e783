"""Scalar quaternions and vectorized quaternion arrays.

Scalars are small immutable dataclasses.  Bulk data is stored as float64
arrays whose trailing axis holds the coefficients ``(w, x, y, z)`` of
``w + x i + y j + z k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Quaternion:
    """The quaternion ``w + x i + y j + z k``."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, other):
        other = as_quaternion(other)
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        return self + (-as_quaternion(other))

    def __rsub__(self, other):
        return as_quaternion(other) - self

    def __mul__(self, other):
        return qmul(self, as_quaternion(other))

    def __rmul__(self, other):
        return qmul(as_quaternion(other), self)

    def __truediv__(self, s):
        return Quaternion(self.w / s, self.x / s, self.y / s, self.z / s)

    def conj(self):
        return qconj(self)

    def norm(self):
        return qnorm(self)

    def inverse(self):
        return qinv(self)

    def as_array(self):
        return np.array([self.w, self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def isclose(self, other, atol=1e-12):
        return bool(np.allclose(self.as_array(), as_quaternion(other).as_array(),
                                rtol=0.0, atol=atol))


def as_quaternion(v):
    """Promote a real number to a Quaternion; pass quaternions through."""
    if isinstance(v, Quaternion):
        return v
    if isinstance(v, PureUnitQuaternion):
        return v.as_quaternion()
    return Quaternion(float(v))


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def qmul(p, q):
    """Hamilton product ``p q``."""
    p = as_quaternion(p)
    q = as_quaternion(q)
    return Quaternion(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )


def qconj(q):
    q = as_quaternion(q)
    return Quaternion(q.w, -q.x, -q.y, -q.z)


def qnorm(q):
    q = as_quaternion(q)
    return math.sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z)


def qinv(q):
    """Multiplicative inverse ``conj(q) / |q|^2``.

    Raises ZeroDivisionError for the zero quaternion.
    """
    q = as_quaternion(q)
    n2 = q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z
    if n2 == 0.0:
        raise ZeroDivisionError("zero quaternion has no inverse")
    c = qconj(q)
    return Quaternion(c.w / n2, c.x / n2, c.y / n2, c.z / n2)


@dataclass(frozen=True)
class PureUnitQuaternion:
    """A pure quaternion ``a i + b j + c k`` of unit length.

    The input vector is renormalized on construction, so ``mu * mu == -1``
    holds to rounding.  Vectors shorter than 1e-8 are rejected.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        v = np.array([self.a, self.b, self.c], dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("mu must be finite")
        n = float(np.linalg.norm(v))
        if n < 1e-8:
            raise ValueError("mu must be a nonzero pure quaternion")
        v = v / n
        object.__setattr__(self, "a", float(v[0]))
        object.__setattr__(self, "b", float(v[1]))
        object.__setattr__(self, "c", float(v[2]))

    @property
    def vector(self):
        return np.array([self.a, self.b, self.c])

    def as_quaternion(self):
        return Quaternion(0.0, self.a, self.b, self.c)

    def as_array(self):
        return np.array([0.0, self.a, self.b, self.c])

    def __str__(self):
        return f"{self.a:.17g},{self.b:.17g},{self.c:.17g}"


MU_I = PureUnitQuaternion(1.0, 0.0, 0.0)
MU_SYM = PureUnitQuaternion(1.0, 1.0, 1.0)


def parse_mu(text):
    """Parse ``'i'``, ``'j'``, ``'k'``, ``'sym'`` or ``'a,b,c'``."""
    if isinstance(text, PureUnitQuaternion):
        return text
    t = str(text).strip().lower()
    named = {"i": (1, 0, 0), "j": (0, 1, 0), "k": (0, 0, 1), "sym": (1, 1, 1)}
    if t in named:
        return PureUnitQuaternion(*named[t])
    parts = [p for p in t.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise ValueError(f"cannot parse mu from {text!r}")
    return PureUnitQuaternion(*(float(p) for p in parts))


def mu_variants(mu):
    """Return ``(mu_i, mu_j, mu_k)``: mu with two of its three signs flipped."""
    a, b, c = mu.a, mu.b, mu.c
    return (PureUnitQuaternion(a, -b, -c),
            PureUnitQuaternion(-a, b, -c),
            PureUnitQuaternion(-a, -b, c))


# ---------------------------------------------------------------- arrays

def qmul_arrays(p, q):
    """Elementwise Hamilton product of arrays with trailing axis 4."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ], axis=-1)


def qconj_arrays(q):
    out = np.array(q, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def qabs_arrays(q):
    """Entrywise quaternion modulus."""
    return np.sqrt(np.sum(np.asarray(q, dtype=float) ** 2, axis=-1))


def to_pairs(q):
    """Split ``q = c1 + c2 j`` into complex arrays ``c1 = w + ix``, ``c2 = y + iz``."""
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def from_pairs(c1, c2):
    """Inverse of :func:`to_pairs`."""
    return np.stack([c1.real, c1.imag, c2.real, c2.imag], axis=-1)


def embed(real=None, i=None, j=None, k=None):
    """Assemble a quaternion array from real component arrays."""
    comps = [real, i, j, k]
    shape = next(np.shape(c) for c in comps if c is not None)
    out = np.zeros(tuple(shape) + (4,))
    for idx, c in enumerate(comps):
        if c is not None:
            out[..., idx] = c
    return out
