"""Linear and quadratic bounds on ``f(b) - f(a)`` from derivative bounds.

Every function here is pure.  Each per-coordinate (or per-pair) term takes
the min or max of the two candidate products directly instead of branching
on the sign of the displacement; both give the same value.

Segment-local bounds use the same four general functions, fed with constants
that only hold on the segment (see ``estimation.estimate_segment_kappa``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ._backend import kernels
from .core import MAX_MAGNITUDE, CurvatureBox, DomainError, LipschitzBox, Segment

__all__ = [
    "BoundVariant",
    "VARIANTS",
    "linear_lower",
    "linear_upper",
    "quadratic_lower",
    "quadratic_upper",
    "symmetric_linear_lower",
    "symmetric_linear_upper",
    "symmetric_quadratic_lower",
    "symmetric_quadratic_upper",
    "kappa_norm",
    "m_norm",
    "norm_linear_lower",
    "norm_linear_upper",
    "norm_quadratic_lower",
    "norm_quadratic_upper",
    "all_bounds",
    "bounds_batch",
]


@dataclass(frozen=True)
class BoundVariant:
    order: Literal["linear", "quadratic"]
    form: Literal["general", "symmetric", "norm"]
    side: Literal["lower", "upper"]
    locality: Literal["global", "segment_local"] = "global"

    @property
    def name(self) -> str:
        return f"{self.order}_{self.form}_{self.side}"

    @property
    def is_lower(self) -> bool:
        return self.side == "lower"

    def localized(self) -> "BoundVariant":
        return BoundVariant(self.order, self.form, self.side, "segment_local")


VARIANTS = tuple(
    BoundVariant(order, form, side)
    for order in ("linear", "quadratic")
    for form in ("general", "symmetric", "norm")
    for side in ("lower", "upper")
)


def _displacement(seg: Segment, dim: int) -> np.ndarray:
    if seg.dim != dim:
        raise DomainError(f"segment has dimension {seg.dim}, constants have {dim}")
    d = seg.d
    if np.max(np.abs(d)) > MAX_MAGNITUDE:
        raise DomainError("segment displacement too large")
    return d


def _gradient(grad_a, dim: int) -> np.ndarray:
    g = np.asarray(grad_a, dtype=float)
    if g.shape != (dim,):
        raise DomainError(f"gradient has shape {g.shape}, expected ({dim},)")
    if not np.all(np.isfinite(g)) or np.max(np.abs(g)) > MAX_MAGNITUDE:
        raise DomainError("gradient must be finite and below the magnitude cap")
    return g


def _nonneg_vector(k, what: str) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.ndim != 1 or not np.all(np.isfinite(k)):
        raise DomainError(f"{what} must be a finite vector")
    if np.any(k < 0):
        raise DomainError(f"{what} must be non-negative")
    return k


def _nonneg_symmetric(m, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or not np.all(np.isfinite(m)):
        raise DomainError(f"{what} must be a finite square matrix")
    if np.any(m < 0):
        raise DomainError(f"{what} must be non-negative")
    if not np.array_equal(m, m.T):
        raise DomainError(f"{what} must be symmetric")
    return m


def _nonneg_scalar(c, what: str) -> float:
    c = float(c)
    if not np.isfinite(c) or c < 0:
        raise DomainError(f"{what} must be a finite non-negative number, got {c}")
    return c


# -- general forms ---------------------------------------------------------

def linear_lower(seg: Segment, k: LipschitzBox) -> float:
    """Lower bound ``sum_i min(lo_i d_i, hi_i d_i)`` on ``f(b) - f(a)``."""
    d = _displacement(seg, k.dim)
    return float(np.sum(np.minimum(k.lo * d, k.hi * d)))


def linear_upper(seg: Segment, k: LipschitzBox) -> float:
    d = _displacement(seg, k.dim)
    return float(np.sum(np.maximum(k.lo * d, k.hi * d)))


def quadratic_lower(seg: Segment, grad_a, m: CurvatureBox) -> float:
    """Second-order lower bound on ``f(b) - f(a)``.

    ``grad_a`` is the gradient of f at ``seg.a``; it may be analytic,
    measured or estimated.  The curvature sum runs over all n^2 pairs.
    """
    d = _displacement(seg, m.dim)
    g = _gradient(grad_a, m.dim)
    p = np.outer(d, d)
    return float(g @ d + 0.5 * np.sum(np.minimum(m.lo * p, m.hi * p)))


def quadratic_upper(seg: Segment, grad_a, m: CurvatureBox) -> float:
    d = _displacement(seg, m.dim)
    g = _gradient(grad_a, m.dim)
    p = np.outer(d, d)
    return float(g @ d + 0.5 * np.sum(np.maximum(m.lo * p, m.hi * p)))


# -- symmetric forms --------------------------------------------------------

def symmetric_linear_lower(seg: Segment, k_sym) -> float:
    k = _nonneg_vector(k_sym, "symmetric kappa")
    d = _displacement(seg, k.size)
    return -float(np.sum(k * np.abs(d)))


def symmetric_linear_upper(seg: Segment, k_sym) -> float:
    k = _nonneg_vector(k_sym, "symmetric kappa")
    d = _displacement(seg, k.size)
    return float(np.sum(k * np.abs(d)))


def symmetric_quadratic_lower(seg: Segment, grad_a, m_sym) -> float:
    m = _nonneg_symmetric(m_sym, "symmetric curvature")
    d = _displacement(seg, m.shape[0])
    g = _gradient(grad_a, m.shape[0])
    return float(g @ d - 0.5 * np.sum(m * np.abs(np.outer(d, d))))


def symmetric_quadratic_upper(seg: Segment, grad_a, m_sym) -> float:
    m = _nonneg_symmetric(m_sym, "symmetric curvature")
    d = _displacement(seg, m.shape[0])
    g = _gradient(grad_a, m.shape[0])
    return float(g @ d + 0.5 * np.sum(m * np.abs(np.outer(d, d))))


# -- norm forms -------------------------------------------------------------

def kappa_norm(k_sym) -> float:
    """Largest symmetric first-derivative constant."""
    k = _nonneg_vector(k_sym, "symmetric kappa")
    if k.size == 0:
        raise DomainError("empty kappa vector")
    return float(np.max(k))


def m_norm(m_sym) -> float:
    """Largest row sum of the symmetric curvature matrix.

    For symmetric non-negative M, ``sum_ij M_ij |d_i||d_j|`` is at most
    ``sum_ij M_ij (d_i^2 + d_j^2) / 2``, which this times ``||d||_2^2`` bounds.
    """
    m = _nonneg_symmetric(m_sym, "symmetric curvature")
    return float(np.max(m.sum(axis=1)))


def norm_linear_lower(seg: Segment, kappa: float) -> float:
    c = _nonneg_scalar(kappa, "kappa")
    return -c * float(np.sum(np.abs(seg.d)))


def norm_linear_upper(seg: Segment, kappa: float) -> float:
    c = _nonneg_scalar(kappa, "kappa")
    return c * float(np.sum(np.abs(seg.d)))


def norm_quadratic_lower(seg: Segment, grad_a, M: float) -> float:
    c = _nonneg_scalar(M, "M")
    g = _gradient(grad_a, seg.dim)
    d = seg.d
    return float(g @ d - 0.5 * c * (d @ d))


def norm_quadratic_upper(seg: Segment, grad_a, M: float) -> float:
    c = _nonneg_scalar(M, "M")
    g = _gradient(grad_a, seg.dim)
    d = seg.d
    return float(g @ d + 0.5 * c * (d @ d))


# -- all variants at once ---------------------------------------------------

def all_bounds(seg: Segment, grad_a, k: LipschitzBox, m: CurvatureBox) -> dict:
    """Every variant for one segment, keyed by variant name.

    Symmetric and norm constants are derived from ``k`` and ``m``.
    """
    ks = k.sym()
    ms = m.sym()
    kn, mn = kappa_norm(ks), m_norm(ms)
    return {
        "linear_general_lower": linear_lower(seg, k),
        "linear_general_upper": linear_upper(seg, k),
        "linear_symmetric_lower": symmetric_linear_lower(seg, ks),
        "linear_symmetric_upper": symmetric_linear_upper(seg, ks),
        "linear_norm_lower": norm_linear_lower(seg, kn),
        "linear_norm_upper": norm_linear_upper(seg, kn),
        "quadratic_general_lower": quadratic_lower(seg, grad_a, m),
        "quadratic_general_upper": quadratic_upper(seg, grad_a, m),
        "quadratic_symmetric_lower": symmetric_quadratic_lower(seg, grad_a, ms),
        "quadratic_symmetric_upper": symmetric_quadratic_upper(seg, grad_a, ms),
        "quadratic_norm_lower": norm_quadratic_lower(seg, grad_a, mn),
        "quadratic_norm_upper": norm_quadratic_upper(seg, grad_a, mn),
    }


def _per_row(x, N, shape):
    x = np.asarray(x, dtype=float)
    if x.shape == shape:
        return np.broadcast_to(x, (N,) + shape)
    if x.shape != (N,) + shape:
        raise DomainError(f"constants have shape {x.shape}, expected {shape} or {(N,) + shape}")
    return x


def bounds_batch(A, B, G, klo, khi, mlo, mhi, kernel=None) -> np.ndarray:
    """Evaluate all twelve variants for many segments at once.

    ``A``, ``B`` and ``G`` are ``(N, n)`` arrays of start points, end points
    and gradients at the start points.  Constants are either shared
    (``(n,)`` / ``(n, n)``) or given per segment (``(N, n)`` / ``(N, n, n)``).
    Returns an ``(N, 12)`` array ordered like ``VARIANTS``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    G = np.atleast_2d(np.asarray(G, dtype=float))
    if A.shape != B.shape or A.shape != G.shape:
        raise DomainError(f"shape mismatch: {A.shape}, {B.shape}, {G.shape}")
    N, n = A.shape
    D = B - A
    klo = _per_row(klo, N, (n,))
    khi = _per_row(khi, N, (n,))
    mlo = _per_row(mlo, N, (n, n))
    mhi = _per_row(mhi, N, (n, n))
    if np.any(klo > khi) or np.any(mlo > mhi):
        raise DomainError("constant intervals with lo > hi")
    ksym = np.maximum(np.abs(klo), np.abs(khi))
    msym = np.maximum(np.abs(mlo), np.abs(mhi))
    knorm = ksym.max(axis=1)
    mnorm = msym.sum(axis=2).max(axis=1)
    k = kernels if kernel is None else kernel
    return k.bounds_batch(D, G, klo, khi, ksym, knorm, mlo, mhi, msym, mnorm)
