"""Empirical derivative constants from sampled derivatives.

Everything here is a heuristic: the returned intervals cover the sampled
derivative values plus an inflation margin, which is enough for exploration
but is not a certificate.  Soundness checks elsewhere use the closed-form
or brute-force oracle constants shipped with the corpus.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import BoxDomain, CurvatureBox, DomainError, FunctionModel, LipschitzBox, Segment

__all__ = [
    "EstimationConfig",
    "EstimationError",
    "estimate_kappa",
    "estimate_M",
    "estimate_segment_kappa",
    "estimate_segment_M",
    "segment_constants_batch",
    "fd_gradient",
    "fd_hessian",
    "inflation_margin",
    "sample_points",
]

_CHUNK = 1 << 15
MAX_GRID_POINTS = 10**6


class EstimationError(FloatingPointError):
    """A derivative evaluation returned a non-finite value."""

    def __init__(self, message: str, point):
        super().__init__(f"{message} at {np.asarray(point).tolist()}")
        self.point = np.asarray(point)


@dataclass(frozen=True)
class EstimationConfig:
    grid_points_per_axis: int = 33
    fd_step: float = 1e-5
    inflation: float = 1e-3
    segment_samples: int = 257
    seed: int = 0
    max_points: int = MAX_GRID_POINTS
    workers: int = 1

    def __post_init__(self):
        if self.grid_points_per_axis < 2:
            raise ValueError("grid_points_per_axis must be at least 2")
        if self.segment_samples < 2:
            raise ValueError("segment_samples must be at least 2")
        if self.inflation < 0:
            raise ValueError("inflation must be non-negative")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def inflation_margin(lo, hi, inflation: float):
    """Margin added to both ends of an interval: ``inflation * max(1, |lo|, |hi|)``."""
    return inflation * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))


# -- finite differences ---------------------------------------------------

def _steps(X, step):
    return step * (1.0 + np.abs(X))


def _check_stencil(model: FunctionModel, X, H):
    dom = model.domain
    lo_ok = np.all(X - H >= dom.lower, axis=-1)
    hi_ok = np.all(X + H <= dom.upper, axis=-1)
    ok = lo_ok & hi_ok
    if not np.all(ok):
        bad = X.reshape(-1, model.dim)[np.flatnonzero(~ok.ravel())[0]]
        raise DomainError(f"finite-difference stencil leaves the domain of {model.name!r} at {bad.tolist()}")


def _fd_grad_points(model: FunctionModel, X, step):
    X = np.asarray(X, dtype=float)
    H = _steps(X, step)
    _check_stencil(model, X, H)
    n = model.dim
    G = np.empty_like(X)
    for i in range(n):
        Xp = X.copy()
        Xm = X.copy()
        Xp[..., i] += H[..., i]
        Xm[..., i] -= H[..., i]
        # actual step after rounding of x + h
        h2 = Xp[..., i] - Xm[..., i]
        G[..., i] = (model.f(Xp) - model.f(Xm)) / h2
    return G


def _fd_hess_points(model: FunctionModel, X, step, use_grad):
    X = np.asarray(X, dtype=float)
    n = model.dim
    H = _steps(X, step)
    _check_stencil(model, X, H)
    out = np.empty(X.shape + (n,))
    if use_grad and model.grad is not None:
        for j in range(n):
            Xp = X.copy()
            Xm = X.copy()
            Xp[..., j] += H[..., j]
            Xm[..., j] -= H[..., j]
            h2 = (Xp[..., j] - Xm[..., j])[..., None]
            out[..., :, j] = (model.gradient(Xp) - model.gradient(Xm)) / h2
    else:
        f0 = model.f(X)
        for i in range(n):
            for j in range(i, n):
                hi, hj = H[..., i], H[..., j]
                if i == j:
                    Xp = X.copy()
                    Xm = X.copy()
                    Xp[..., i] += hi
                    Xm[..., i] -= hi
                    v = (model.f(Xp) - 2.0 * f0 + model.f(Xm)) / (hi * hi)
                else:
                    pts = []
                    for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                        P = X.copy()
                        P[..., i] += si * hi
                        P[..., j] += sj * hj
                        pts.append(model.f(P))
                    v = (pts[0] - pts[1] - pts[2] + pts[3]) / (4.0 * hi * hj)
                out[..., i, j] = v
                out[..., j, i] = v
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def fd_gradient(model: FunctionModel, x, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient with per-axis step ``step * (1 + |x_i|)``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise DomainError(f"point has shape {x.shape}, model dimension is {model.dim}")
    return _fd_grad_points(model, x, step)


def fd_hessian(model: FunctionModel, x, step: float = 1e-5, use_grad: bool = False) -> np.ndarray:
    """Symmetrised central-difference Hessian.

    By default only function values are used.  With ``use_grad=True`` and an
    analytic gradient, the gradient is differenced instead, which is far less
    sensitive to rounding.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise DomainError(f"point has shape {x.shape}, model dimension is {model.dim}")
    return _fd_hess_points(model, x, step, use_grad)


# -- sampling -------------------------------------------------------------

def _latin_hypercube(box: BoxDomain, size: int, rng: np.random.Generator) -> np.ndarray:
    n = box.dim
    u = np.empty((size, n))
    for i in range(n):
        u[:, i] = (rng.permutation(size) + rng.random(size)) / size
    return box.lower + u * box.widths


def _vertices(box: BoxDomain) -> np.ndarray:
    n = box.dim
    bits = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    return np.where(bits == 1, box.upper, box.lower)


def sample_points(box: BoxDomain, cfg: EstimationConfig) -> np.ndarray:
    """Points at which derivatives are sampled over ``box``.

    Full tensor grid for n <= 4.  Otherwise Latin-hypercube stratified
    samples (seeded from ``cfg.seed``, capped at ``cfg.max_points``) plus the
    box vertices when there are at most 1024 of them.
    """
    n = box.dim
    g = cfg.grid_points_per_axis
    if n <= 4:
        return box.grid(g)
    size = int(min(float(g) ** n, cfg.max_points))
    pts = _latin_hypercube(box, size, np.random.default_rng(cfg.seed))
    if n <= 10:
        pts = np.vstack([_vertices(box), pts])
    return pts


def _derivs(model: FunctionModel, X, order: int, cfg: EstimationConfig):
    if order == 1:
        D = model.gradient(X) if model.grad is not None else _fd_grad_points(model, X, cfg.fd_step)
    else:
        if model.hess is not None:
            D = model.hessian(X)
            D = 0.5 * (D + np.swapaxes(D, -1, -2))
        else:
            D = _fd_hess_points(model, X, cfg.fd_step, use_grad=True)
    flat = D.reshape(D.shape[0], -1)
    finite = np.all(np.isfinite(flat), axis=1)
    if not np.all(finite):
        raise EstimationError("non-finite derivative", X[np.flatnonzero(~finite)[0]])
    return D


def _extremes(model: FunctionModel, X, order: int, cfg: EstimationConfig):
    chunks = [X[i:i + _CHUNK] for i in range(0, X.shape[0], _CHUNK)]

    def reduce(chunk):
        D = _derivs(model, chunk, order, cfg)
        return D.min(axis=0), D.max(axis=0)

    if cfg.workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(reduce, chunks))
    else:
        parts = [reduce(c) for c in chunks]
    lo = np.min([p[0] for p in parts], axis=0)
    hi = np.max([p[1] for p in parts], axis=0)
    return lo, hi


def _check_box(model: FunctionModel, box: BoxDomain):
    if box.dim != model.dim:
        raise DomainError(f"box has dimension {box.dim}, model has {model.dim}")
    if not model.domain.contains_box(box):
        raise DomainError(f"{box!r} is not contained in the domain of {model.name!r}")


def _inflate(lo, hi, inflation):
    m = inflation_margin(lo, hi, inflation)
    return lo - m, hi + m


def estimate_kappa(model: FunctionModel, box: BoxDomain, cfg: EstimationConfig = EstimationConfig()) -> LipschitzBox:
    """Sampled first-partial extremes over ``box`` widened by the inflation margin."""
    _check_box(model, box)
    lo, hi = _extremes(model, sample_points(box, cfg), 1, cfg)
    return LipschitzBox(*_inflate(lo, hi, cfg.inflation))


def estimate_M(model: FunctionModel, box: BoxDomain, cfg: EstimationConfig = EstimationConfig()) -> CurvatureBox:
    """Sampled Hessian-entry extremes over ``box``; see :func:`estimate_kappa`."""
    _check_box(model, box)
    lo, hi = _extremes(model, sample_points(box, cfg), 2, cfg)
    return CurvatureBox(*_inflate(lo, hi, cfg.inflation))


def _segment_points(A, B, samples):
    t = np.linspace(0.0, 1.0, samples)
    return A[:, None, :] + t[None, :, None] * (B - A)[:, None, :]


def _check_segment(model, seg: Segment):
    if seg.dim != model.dim:
        raise DomainError(f"segment has dimension {seg.dim}, model has {model.dim}")
    if not (model.domain.contains(seg.a) and model.domain.contains(seg.b)):
        raise DomainError(f"{seg!r} leaves the domain of {model.name!r}")


def estimate_segment_kappa(model: FunctionModel, seg: Segment, cfg: EstimationConfig = EstimationConfig()) -> LipschitzBox:
    """First-partial constants valid (empirically) on the segment only."""
    _check_segment(model, seg)
    X = _segment_points(seg.a[None], seg.b[None], cfg.segment_samples)[0]
    lo, hi = _extremes(model, X, 1, cfg)
    return LipschitzBox(*_inflate(lo, hi, cfg.inflation))


def estimate_segment_M(model: FunctionModel, seg: Segment, cfg: EstimationConfig = EstimationConfig()) -> CurvatureBox:
    _check_segment(model, seg)
    X = _segment_points(seg.a[None], seg.b[None], cfg.segment_samples)[0]
    lo, hi = _extremes(model, X, 2, cfg)
    return CurvatureBox(*_inflate(lo, hi, cfg.inflation))


def segment_constants_batch(model: FunctionModel, A, B, cfg: EstimationConfig = EstimationConfig()):
    """Segment-local constants for many segments.

    Returns ``(klo, khi, mlo, mhi)`` with shapes ``(N, n)`` and ``(N, n, n)``;
    row ``r`` equals what the single-segment estimators give for ``A[r] -> B[r]``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    N, n = A.shape
    if not (model.domain.contains(A) and model.domain.contains(B)):
        raise DomainError(f"segments leave the domain of {model.name!r}")
    S = cfg.segment_samples
    per = max(1, _CHUNK // (S * max(1, n)))
    klo = np.empty((N, n))
    khi = np.empty((N, n))
    mlo = np.empty((N, n, n))
    mhi = np.empty((N, n, n))
    for s in range(0, N, per):
        X = _segment_points(A[s:s + per], B[s:s + per], S)
        m = X.shape[0]
        flat = X.reshape(-1, n)
        G = _derivs(model, flat, 1, cfg).reshape(m, S, n)
        H = _derivs(model, flat, 2, cfg).reshape(m, S, n, n)
        klo[s:s + m], khi[s:s + m] = _inflate(G.min(axis=1), G.max(axis=1), cfg.inflation)
        mlo[s:s + m], mhi[s:s + m] = _inflate(H.min(axis=1), H.max(axis=1), cfg.inflation)
    return klo, khi, mlo, mhi
