"""Low-rank quaternion tensor completion with TV regularization.

Two solvers share the same building blocks:

* ``qrtc`` minimizes
  ``1/2 ||A * B - C||^2 + lam/2 (||A||^2 + ||B||^2) + sum_k lam_k ||C x_k H||^2``
  over pure-imaginary ``C`` agreeing with the data on the observed set and
  factors kept per slice in the mode-3 transform domain.
* ``mqrtc`` fits one factor pair per mode with weights ``alpha_w`` against a
  common ``C``.

Each outer iteration updates ``C`` with a projected Barzilai-Borwein gradient
loop, then the factors by closed-form proximal least squares.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .algebra import (check_tensor, from_mode, tensor_from_transformed_slices, to_mode,
                      transformed_slices)
from .errors import ConfigError, DimensionMismatch, DimensionTooSmall, NonFinite
from .qlinalg import hermitian_solve, qm_conj_t, qm_identity, qm_mul
from .quat import MU_SYM, PureUnitQuaternion, parse_mu

log = logging.getLogger(__name__)


# ------------------------------------------------------------ configuration

@dataclass
class SolverConfig:
    """Model weights and iteration controls.

    ``lam`` weights the factor penalty, ``lam1``/``lam2`` the TV terms along
    modes 1 and 2, ``beta`` the proximal damping of the factor updates and
    ``alpha`` the per-mode weights (MQRTC only).  ``rank`` is an int or a
    per-slice vector of length ``n3``.
    """

    mu: PureUnitQuaternion = MU_SYM
    lam: float = 21.0
    lam1: float = 5.0
    lam2: float = 5.0
    beta: float = 0.1
    alpha: tuple = (10.0, 10.0, 1.0)
    rank: Union[int, Sequence[int]] = 30
    epsilon: float = 1e-3
    max_outer: int = 20
    max_inner: int = 100
    inner_alpha0: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.mu, PureUnitQuaternion):
            self.mu = parse_mu(self.mu)
        self.alpha = tuple(float(a) for a in self.alpha)
        if not isinstance(self.rank, (int, np.integer)):
            self.rank = tuple(int(r) for r in self.rank)
        else:
            self.rank = int(self.rank)

    def validate(self):
        for name in ("lam", "lam1", "lam2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be finite and nonnegative, got {v}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if len(self.alpha) != 3 or any(not (math.isfinite(a) and a >= 0) for a in self.alpha):
            raise ConfigError(f"alpha must be three nonnegative weights, got {self.alpha}")
        if not (self.epsilon > 0):
            raise ConfigError("epsilon must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ConfigError("iteration limits must be positive")
        if not (self.inner_alpha0 > 0):
            raise ConfigError("inner_alpha0 must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")

    def rank_vector(self, n1, n2, n3):
        """Per-slice ranks for the mode-3 factors, validated against the shape."""
        if isinstance(self.rank, int):
            r = np.full(n3, self.rank, dtype=int)
        else:
            r = np.asarray(self.rank, dtype=int)
            if r.shape != (n3,):
                raise ConfigError(f"rank vector has length {r.size}, expected {n3}")
        if np.any(r < 1) or np.any(r > min(n1, n2)):
            raise ConfigError(f"ranks must lie in [1, {min(n1, n2)}], got {r.tolist()}")
        return r

    def to_dict(self):
        d = asdict(self)
        d["mu"] = [self.mu.a, self.mu.b, self.mu.c]
        d["alpha"] = list(self.alpha)
        d["rank"] = self.rank if isinstance(self.rank, int) else list(self.rank)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "mu" in d and isinstance(d["mu"], (list, tuple)):
            d["mu"] = PureUnitQuaternion(*d["mu"])
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown solver settings: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class ObservationMask:
    """Boolean mask over ``(n1, n2, n3)``; True marks an observed pixel."""

    observed: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.observed, dtype=bool)
        if a.ndim != 3:
            raise DimensionMismatch(f"mask must be 3-dimensional, got shape {a.shape}")
        object.__setattr__(self, "observed", a)

    @property
    def shape(self):
        return self.observed.shape

    @property
    def count(self):
        return int(self.observed.sum())

    @property
    def ratio(self):
        return self.count / self.observed.size if self.observed.size else 0.0

    def apply(self, T):
        """Zero every unobserved entry of a quaternion tensor."""
        return np.asarray(T, dtype=float) * self.observed[..., None]


def _mask_array(mask, shape):
    a = mask.observed if isinstance(mask, ObservationMask) else np.asarray(mask, dtype=bool)
    if a.shape != tuple(shape):
        raise DimensionMismatch(f"mask shape {a.shape} does not match data {tuple(shape)}")
    return a


class TraceRow(NamedTuple):
    iter: int
    objective: float
    rel_change: float
    inner_iters: int
    wall_ms: float


@dataclass
class CompletionResult:
    C_hat: np.ndarray
    iterations: int
    objective_trace: list
    final_relative_change: float
    wall_time: float
    trace: list = field(default_factory=list)
    stop_reason: str = ""
    factors: list = field(default_factory=list, repr=False)


class InnerResult(NamedTuple):
    C: np.ndarray
    residual_norm: float
    iterations: int
    satisfied: bool


# ------------------------------------------------------------ TV pieces

def tv_matrix(n):
    """First-difference matrix of size ``(n-1) x n``: ``H[i,i] = 1``, ``H[i,i+1] = -1``."""
    if n < 2:
        raise DimensionTooSmall("difference matrix needs n >= 2")
    H = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    H[idx, idx] = 1.0
    H[idx, idx + 1] = -1.0
    return H


def mode_k_product(C, M, k):
    """Contract a real matrix ``M`` against axis ``k`` (1 or 2) of ``C``."""
    C = np.asarray(C, dtype=float)
    M = np.asarray(M, dtype=float)
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    if M.ndim != 2 or M.shape[1] != C.shape[k - 1]:
        raise DimensionMismatch(f"matrix {M.shape} does not act on extent {C.shape[k - 1]}")
    return np.moveaxis(np.tensordot(M, C, axes=(1, k - 1)), 0, k - 1)


def _diff(C, axis):
    # C x_k H along `axis`
    return np.take(C, range(C.shape[axis] - 1), axis=axis) - np.take(C, range(1, C.shape[axis]), axis=axis)


def _diff_adjoint(D, axis):
    n = D.shape[axis] + 1
    shape = list(D.shape)
    shape[axis] = n
    out = np.zeros(shape)
    lo = [slice(None)] * D.ndim
    hi = [slice(None)] * D.ndim
    lo[axis] = slice(0, n - 1)
    hi[axis] = slice(1, n)
    out[tuple(lo)] += D
    out[tuple(hi)] -= D
    return out


def tv_value(C, lam1, lam2):
    """``lam1 ||C x_1 H||^2 + lam2 ||C x_2 H||^2``."""
    val = 0.0
    if lam1 and C.shape[0] > 1:
        val += lam1 * float(np.sum(_diff(C, 0) ** 2))
    if lam2 and C.shape[1] > 1:
        val += lam2 * float(np.sum(_diff(C, 1) ** 2))
    return val


def tv_grad(C, lam1, lam2):
    g = np.zeros_like(C)
    if lam1 and C.shape[0] > 1:
        g += 2.0 * lam1 * _diff_adjoint(_diff(C, 0), 0)
    if lam2 and C.shape[1] > 1:
        g += 2.0 * lam2 * _diff_adjoint(_diff(C, 1), 1)
    return g


# ------------------------------------------------------------ factor algebra

def product_from_factors(A_hat, B_hat, mu):
    """Spatial tensor whose transformed slices are ``A_hat[l] B_hat[l]``."""
    return tensor_from_transformed_slices(qm_mul(A_hat, B_hat), mu)


def _as_pure(C):
    """Accept a quaternion tensor or its imaginary part; return the imaginary part."""
    C = np.asarray(C, dtype=float)
    if C.shape[-1] == 4:
        return C[..., 1:]
    if C.shape[-1] == 3:
        return C
    raise DimensionMismatch(f"expected trailing axis 3 or 4, got {C.shape}")


def _embed(Cim):
    out = np.zeros(Cim.shape[:-1] + (4,))
    out[..., 1:] = Cim
    return out


def _mode_terms(Cq, A_hat, B_hat, mu, w, weight, lam):
    """Fit and factor-penalty terms of one mode, evaluated in the transform domain."""
    C_hat = transformed_slices(to_mode(Cq, w), mu)
    n = C_hat.shape[0]
    R = qm_mul(A_hat, B_hat) - C_hat
    fit = 0.5 * weight * float(np.sum(R * R)) / n
    reg = 0.5 * lam * (float(np.sum(A_hat * A_hat)) + float(np.sum(B_hat * B_hat))) / n
    return fit + reg


def objective_qrtc(C, A_hat, B_hat, cfg):
    """QRTC objective with the factor terms evaluated in the transform domain."""
    Cim = _as_pure(C)
    Cq = _embed(Cim)
    n1, n2, n3 = Cim.shape[:3]
    if A_hat.shape[:2] != (n3, n1) or B_hat.shape[0] != n3 or B_hat.shape[2] != n2:
        raise DimensionMismatch("factor shapes do not match C")
    return _mode_terms(Cq, A_hat, B_hat, cfg.mu, 3, 1.0, cfg.lam) + tv_value(Cim, cfg.lam1, cfg.lam2)


def _smooth_value(Cim, target, weight, lam1, lam2):
    d = Cim - target
    return 0.5 * weight * float(np.sum(d * d)) + tv_value(Cim, lam1, lam2)


def _smooth_grad(Cim, target, weight, lam1, lam2):
    return weight * (Cim - target) + tv_grad(Cim, lam1, lam2)


def grad_c_qrtc(C, A_hat, B_hat, cfg):
    """Gradient of the C-subproblem objective w.r.t. the i, j, k parts of C.

    Returns an array of shape ``(n1, n2, n3, 3)``.
    """
    Cim = _as_pure(C)
    X = product_from_factors(A_hat, B_hat, cfg.mu)
    if X.shape[:3] != Cim.shape[:3]:
        raise DimensionMismatch("factor shapes do not match C")
    return _smooth_grad(Cim, X[..., 1:], 1.0, cfg.lam1, cfg.lam2)


def update_a_slice(C_hat_l, B_hat_l_prev, A_hat_l_prev, lam, beta, alpha_w=1.0):
    """Closed-form proximal update ``(a C B* + b A0)(a B B* + (lam + b) I)^-1``.

    Works on single slices or batches of slices.
    """
    if lam + beta <= 0:
        raise ConfigError("lam + beta must be positive")
    r = B_hat_l_prev.shape[-3]
    N = alpha_w * qm_mul(C_hat_l, qm_conj_t(B_hat_l_prev)) + beta * A_hat_l_prev
    H = alpha_w * qm_mul(B_hat_l_prev, qm_conj_t(B_hat_l_prev)) + (lam + beta) * qm_identity(r)
    return qm_conj_t(hermitian_solve(H, qm_conj_t(N)))


def update_b_slice(C_hat_l, A_hat_l_new, B_hat_l_prev, lam, beta, alpha_w=1.0):
    """Closed-form proximal update ``(a A* A + (lam + b) I)^-1 (a A* C + b B0)``."""
    if lam + beta <= 0:
        raise ConfigError("lam + beta must be positive")
    r = A_hat_l_new.shape[-2]
    Ah = qm_conj_t(A_hat_l_new)
    H = alpha_w * qm_mul(Ah, A_hat_l_new) + (lam + beta) * qm_identity(r)
    N = alpha_w * qm_mul(Ah, C_hat_l) + beta * B_hat_l_prev
    return hermitian_solve(H, N)


# ------------------------------------------------------------ C-subproblem

def _bb_pgm(target, weight, M_obs, observed, C_prev, lam1, lam2, max_inner, alpha0, abs_tol):
    """Projected Barzilai-Borwein gradient loop for the C-subproblem.

    Minimizes ``weight/2 ||C - target||^2 + TV(C)`` over pure tensors that
    equal ``M_obs`` on the observed set, warm-started at the feasible
    ``C_prev``.  Exits once the free-entry gradient norm is at most a quarter
    of the step length from ``C_prev`` (or ``abs_tol``) and the objective has
    not increased.  If the cap is reached without descent, ``C_prev`` is kept.
    """
    free = ~observed[..., None]

    def residual(g):
        return float(np.sqrt(np.sum((g * free) ** 2)))

    f_prev = _smooth_value(C_prev, target, weight, lam1, lam2)
    z = C_prev
    g = _smooth_grad(z, target, weight, lam1, lam2)
    res = residual(g)
    if res <= abs_tol:
        return InnerResult(z, res, 0, True)

    step = alpha0
    z_old = g_old = None
    best = (f_prev, C_prev, res)
    k = 0
    satisfied = False
    while k < max_inner:
        k += 1
        if z_old is not None:
            s = z - z_old
            y = g - g_old
            ss = float(np.sum(s * s))
            sy = float(np.sum(s * y))
            if sy > 1e-15 * ss:
                step = min(max(ss / sy, 1e-8), 1e8)
        z_new = z - step * g
        z_new = np.where(free, z_new, M_obs)
        if not np.all(np.isfinite(z_new)):
            raise NonFinite("non-finite iterate in the C-update")
        z_old, g_old = z, g
        z = z_new
        g = _smooth_grad(z, target, weight, lam1, lam2)
        res = residual(g)
        f = _smooth_value(z, target, weight, lam1, lam2)
        if f <= best[0]:
            best = (f, z, res)
        move = float(np.sqrt(np.sum((z - C_prev) ** 2)))
        if f <= f_prev and res <= max(0.25 * move, abs_tol):
            satisfied = True
            break
    if satisfied:
        return InnerResult(z, res, k, True)
    log.debug("C-update stopped after %d steps without meeting the accuracy condition", k)
    return InnerResult(best[1], best[2], k, False)


def _abs_tol(M_obs):
    return 1e-8 * float(np.sqrt(np.sum(M_obs ** 2)))


def solve_c_bbpgm(M, mask, A_hat, B_hat, cfg, C_init):
    """C-update of QRTC.  Returns ``InnerResult(C, residual_norm, iterations, satisfied)``
    with ``C`` a pure quaternion tensor."""
    M = check_tensor(M, "M")
    observed = _mask_array(mask, M.shape[:3])
    M_obs = M[..., 1:] * observed[..., None]
    X = product_from_factors(A_hat, B_hat, cfg.mu)
    out = _bb_pgm(X[..., 1:], 1.0, M_obs, observed, _as_pure(C_init), cfg.lam1, cfg.lam2,
                  cfg.max_inner, cfg.inner_alpha0, _abs_tol(M_obs))
    return out._replace(C=_embed(out.C))


# ------------------------------------------------------------ per-mode factors

class ModeFactors(NamedTuple):
    """Transform-domain factors of one mode with zero padding beyond each slice rank."""

    w: int
    A_hat: np.ndarray   # (n_w, rows, r_max, 4)
    B_hat: np.ndarray   # (n_w, r_max, cols, 4)
    ranks: np.ndarray   # (n_w,)

    def col_mask(self):
        r_max = self.A_hat.shape[2]
        return (np.arange(r_max)[None, :] < self.ranks[:, None]).astype(float)


def _init_factors(rng, w, rows, cols, ranks):
    n = len(ranks)
    r_max = int(ranks.max())
    A = rng.standard_normal((n, rows, r_max, 4))
    B = rng.standard_normal((n, r_max, cols, 4))
    keep = (np.arange(r_max)[None, :] < ranks[:, None]).astype(float)
    scale = keep / np.sqrt(ranks)[:, None]
    A *= scale[:, None, :, None]
    B *= scale[:, :, None, None]
    return ModeFactors(w, A, B, ranks)


def _update_factors(fac, Cq, mu, lam, beta, alpha_w):
    C_hat = transformed_slices(to_mode(Cq, fac.w), mu)
    keep = fac.col_mask()
    A = update_a_slice(C_hat, fac.B_hat, fac.A_hat, lam, beta, alpha_w)
    A *= keep[:, None, :, None]
    B = update_b_slice(C_hat, A, fac.B_hat, lam, beta, alpha_w)
    B *= keep[:, :, None, None]
    return fac._replace(A_hat=A, B_hat=B)


def _mode_product(fac, mu):
    return from_mode(product_from_factors(fac.A_hat, fac.B_hat, mu), fac.w)


def _mode_shape(shape, w):
    n1, n2, n3 = shape
    return {1: (n2, n3, n1), 2: (n1, n3, n2), 3: (n1, n2, n3)}[w]


def objective_mqrtc(C, factors, cfg):
    """Weighted multi-mode objective; ``factors`` lists one ModeFactors per mode."""
    Cim = _as_pure(C)
    Cq = _embed(Cim)
    total = 0.0
    for fac in sorted(factors, key=lambda f: f.w):
        total += _mode_terms(Cq, fac.A_hat, fac.B_hat, cfg.mu, fac.w, cfg.alpha[fac.w - 1], cfg.lam)
    return total + tv_value(Cim, cfg.lam1, cfg.lam2)


def _weighted_target(factors, cfg):
    weights = cfg.alpha
    total = sum(weights)
    acc = None
    for fac in sorted(factors, key=lambda f: f.w):
        a = weights[fac.w - 1]
        if a == 0:
            continue
        X = a * _mode_product(fac, cfg.mu)[..., 1:]
        acc = X if acc is None else acc + X
    return acc / total, total


def solve_c_pgm_multi(M, mask, factors, cfg, C_init):
    """C-update of MQRTC against the weighted average of the mode products."""
    M = check_tensor(M, "M")
    observed = _mask_array(mask, M.shape[:3])
    M_obs = M[..., 1:] * observed[..., None]
    target, weight = _weighted_target(factors, cfg)
    out = _bb_pgm(target, weight, M_obs, observed, _as_pure(C_init), cfg.lam1, cfg.lam2,
                  cfg.max_inner, cfg.inner_alpha0, _abs_tol(M_obs))
    return out._replace(C=_embed(out.C))


# ------------------------------------------------------------ drivers

def _prepare(M, mask, cfg):
    M = check_tensor(M, "M")
    if M.shape[0] < 1 or M.shape[1] < 1 or M.shape[2] < 1:
        raise ConfigError("empty tensor")
    cfg.validate()
    observed = _mask_array(mask, M.shape[:3])
    M_obs = M[..., 1:] * observed[..., None]
    if not np.all(np.isfinite(M_obs)):
        raise NonFinite("observed data contain NaN or infinity")
    return M, observed, M_obs


def _run(M, mask, cfg, modes, callback):
    t0 = time.perf_counter()
    M, observed, M_obs = _prepare(M, mask, cfg)
    n1, n2, n3 = M.shape[:3]
    r3 = cfg.rank_vector(n1, n2, n3)
    rng = np.random.default_rng(cfg.seed)
    factors = {}
    for w in modes:
        rows, cols, n = _mode_shape((n1, n2, n3), w)
        ranks = r3 if w == 3 else np.full(n, min(int(r3.max()), rows, cols), dtype=int)
        factors[w] = _init_factors(rng, w, rows, cols, ranks)

    single = modes == (3,)
    if not single and sum(cfg.alpha) <= 0:
        raise ConfigError("alpha weights must not all be zero")

    def objective(Cim):
        if single:
            f3 = factors[3]
            return objective_qrtc(Cim, f3.A_hat, f3.B_hat, cfg)
        return objective_mqrtc(Cim, list(factors.values()), cfg)

    Cim = M_obs.copy()
    abs_tol = _abs_tol(M_obs)
    full = bool(observed.all())
    f_prev = objective(Cim)
    trace = [TraceRow(0, f_prev, float("nan"), 0, 0.0)]
    obj = [f_prev]
    rel = float("nan")
    reason = "max_outer"
    t = 0
    for t in range(1, cfg.max_outer + 1):
        if single:
            target = product_from_factors(factors[3].A_hat, factors[3].B_hat, cfg.mu)[..., 1:]
            weight = 1.0
        else:
            target, weight = _weighted_target(list(factors.values()), cfg)
        inner = _bb_pgm(target, weight, M_obs, observed, Cim, cfg.lam1, cfg.lam2,
                        cfg.max_inner, cfg.inner_alpha0, abs_tol)
        Cim = inner.C
        Cq = _embed(Cim)
        for w in modes:
            a_w = 1.0 if single else cfg.alpha[w - 1]
            factors[w] = _update_factors(factors[w], Cq, cfg.mu, cfg.lam, cfg.beta, a_w)
        f = objective(Cim)
        if not math.isfinite(f):
            raise NonFinite(f"objective became {f} at iteration {t}")
        if abs(f_prev) < 1e-12:
            rel = 0.0
        else:
            rel = abs(f - f_prev) / abs(f_prev)
        obj.append(f)
        row = TraceRow(t, f, rel, inner.iterations, 1e3 * (time.perf_counter() - t0))
        trace.append(row)
        if callback is not None:
            callback(row, _embed(Cim))
        f_prev = f
        if full:
            reason = "fully observed"
            break
        if rel < cfg.epsilon:
            reason = "relative change below epsilon"
            break
    return CompletionResult(
        C_hat=_embed(Cim),
        iterations=t,
        objective_trace=obj,
        final_relative_change=rel,
        wall_time=time.perf_counter() - t0,
        trace=trace,
        stop_reason=reason,
        factors=[factors[w] for w in modes],
    )


def qrtc(M, mask, cfg=None, callback: Optional[Callable] = None):
    """Complete ``M`` on the unobserved set with mode-3 factors only.

    ``M`` is a quaternion tensor whose imaginary part carries the data; only
    entries where ``mask`` is True are read.  ``callback(row, C)`` is invoked
    after every outer iteration.
    """
    return _run(M, mask, cfg or SolverConfig(), (3,), callback)


def mqrtc(M, mask, cfg=None, callback: Optional[Callable] = None):
    """Complete ``M`` with one weighted factor pair per mode.

    Mode-3 factors use ``cfg.rank``; modes 1 and 2 use the largest entry of
    ``cfg.rank`` clipped to their slice sizes.  The mode-3 factors are drawn
    first from the seeded generator so that ``alpha = (0, 0, 1)`` and
    ``lam = 0`` reproduce ``qrtc`` exactly.
    """
    return _run(M, mask, cfg or SolverConfig(), (3, 1, 2), callback)


def write_trace_csv(result, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(TraceRow._fields)
        for row in result.trace:
            wr.writerow([row.iter, repr(float(row.objective)), repr(float(row.rel_change)),
                         row.inner_iters, f"{row.wall_ms:.3f}"])
