"""Check every bound variant against the true change of f on many segments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import VARIANTS, BoundVariant, bounds_batch
from .core import BoundReport, BoxDomain, CurvatureBox, FunctionModel, LipschitzBox, Segment, validity_tol
from .estimation import EstimationConfig, EstimationError, _fd_grad_points, segment_constants_batch

__all__ = ["VerifyBatch", "sample_segments", "verify_segments", "build_report"]


def sample_segments(box: BoxDomain, pairs: int, seed: int, min_step: float = 0.0):
    """Uniform random segment endpoints in ``box``.

    Pairs whose displacement has infinity norm below ``min_step`` are
    redrawn, so every returned segment satisfies ``|b - a|_inf >= min_step``.
    """
    rng = np.random.default_rng(seed)
    A = box.sample(rng, pairs)
    B = box.sample(rng, pairs)
    if min_step > 0:
        short = np.max(np.abs(B - A), axis=1) < min_step
        while np.any(short):
            B[short] = box.sample(rng, int(short.sum()))
            short = np.max(np.abs(B - A), axis=1) < min_step
    return A, B


@dataclass
class VerifyBatch:
    """Bound values and checks for ``N`` segments and ``V`` variants."""

    A: np.ndarray
    B: np.ndarray
    delta_f: np.ndarray        # (N,)
    variants: list             # V BoundVariant
    values: np.ndarray         # (N, V)
    valid: np.ndarray          # (N, V) bool
    strict_ok: np.ndarray      # (N, V) bool

    @property
    def slack(self) -> np.ndarray:
        lower = np.array([v.is_lower for v in self.variants])
        return np.where(lower, self.delta_f[:, None] - self.values, self.values - self.delta_f[:, None])

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(~self.valid))

    @property
    def strict_failures(self) -> int:
        return int(np.count_nonzero(~self.strict_ok))

    def report(self, r: int) -> BoundReport:
        rep = BoundReport(Segment(self.A[r], self.B[r]), float(self.delta_f[r]))
        for j, v in enumerate(self.variants):
            key = (v.name, v.locality)
            rep.values[key] = float(self.values[r, j])
            rep.valid[key] = bool(self.valid[r, j])
            rep.strict_ok[key] = bool(self.strict_ok[r, j])
        return rep


def _gradients(model: FunctionModel, A, fd_step: float):
    G = model.gradient(A) if model.grad is not None else _fd_grad_points(model, A, fd_step)
    bad = ~np.all(np.isfinite(G), axis=1)
    if np.any(bad):
        raise EstimationError("non-finite gradient", A[np.flatnonzero(bad)[0]])
    return G


def _checks(values, delta_f, variants, strict: bool, moved):
    lower = np.array([v.is_lower for v in variants])
    tol = validity_tol(delta_f)[:, None]
    df = delta_f[:, None]
    valid = np.where(lower, values <= df + tol, df <= values + tol)
    if not strict:
        return valid, np.ones_like(valid)
    strictly = np.where(lower, values < df, df < values)
    return valid, strictly | ~moved[:, None]


def verify_segments(model: FunctionModel, A, B, kappa: LipschitzBox, m: CurvatureBox,
                    local: Optional[EstimationConfig] = None, fd_step: float = 1e-5,
                    kernel=None) -> VerifyBatch:
    """Evaluate all twelve global variants (and optionally the local ones).

    Strictness is only demanded for global variants when both constant
    containers are flagged strict; sampled local constants never are.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    fa = model.f(A)
    fb = model.f(B)
    bad = ~(np.isfinite(fa) & np.isfinite(fb))
    if np.any(bad):
        r = np.flatnonzero(bad)[0]
        raise EstimationError("non-finite function value", A[r] if not np.isfinite(fa[r]) else B[r])
    delta_f = fb - fa
    G = _gradients(model, A, fd_step)
    moved = np.any(A != B, axis=1)

    values = bounds_batch(A, B, G, kappa.lo, kappa.hi, m.lo, m.hi, kernel=kernel)
    variants = list(VARIANTS)
    valid, strict_ok = _checks(values, delta_f, variants, kappa.strict and m.strict, moved)

    if local is not None:
        klo, khi, mlo, mhi = segment_constants_batch(model, A, B, local)
        lvals = bounds_batch(A, B, G, klo, khi, mlo, mhi, kernel=kernel)
        lvars = [v.localized() for v in VARIANTS]
        lvalid, lstrict = _checks(lvals, delta_f, lvars, False, moved)
        values = np.hstack([values, lvals])
        valid = np.hstack([valid, lvalid])
        strict_ok = np.hstack([strict_ok, lstrict])
        variants += lvars

    return VerifyBatch(A, B, delta_f, variants, values, valid, strict_ok)


def build_report(model: FunctionModel, seg: Segment, kappa: LipschitzBox, m: CurvatureBox,
                 local: Optional[EstimationConfig] = None) -> BoundReport:
    batch = verify_segments(model, seg.a[None], seg.b[None], kappa, m, local)
    return batch.report(0)


def variant_by_name(name: str, locality: str = "global") -> BoundVariant:
    for v in VARIANTS:
        if v.name == name:
            return v if locality == "global" else v.localized()
    raise KeyError(name)
