"""Domain types shared by the bound kernel, estimators, solver and CLI.

Points are plain read-only ``float64`` arrays.  The containers below are
immutable after construction, so they can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "DomainError",
    "BoxDomain",
    "Segment",
    "LipschitzBox",
    "CurvatureBox",
    "FunctionModel",
    "BoundReport",
    "as_point",
    "point_at",
    "line_derivative",
    "line_second_derivative",
    "validity_tol",
    "MAX_MAGNITUDE",
]

# Inputs beyond this magnitude are rejected so that products stay finite.
MAX_MAGNITUDE = 1e150


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_magnitude(a: np.ndarray, what: str) -> None:
    if a.size and np.max(np.abs(a)) > MAX_MAGNITUDE:
        raise DomainError(f"{what} has entries above {MAX_MAGNITUDE:g} in magnitude")


def as_point(x, name: str = "point") -> np.ndarray:
    """Validate ``x`` as a point in R^n and return a read-only float64 copy."""
    p = np.array(x, dtype=float, ndmin=1)
    if p.ndim != 1 or p.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-d vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DomainError(f"{name} has non-finite coordinates: {p.tolist()}")
    return _frozen(p)


def validity_tol(delta_f):
    """Comparison tolerance used by every validity check."""
    return 1e-9 * (1.0 + np.abs(delta_f))


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Axis-aligned compact box ``[lower, upper]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lower, "box lower")
        hi = as_point(self.upper, "box upper")
        if lo.shape != hi.shape:
            raise DomainError("box lower and upper differ in dimension")
        if np.any(lo > hi):
            raise DomainError(f"box has lower > upper: {lo.tolist()} vs {hi.tolist()}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_bounds(cls, bounds) -> "BoxDomain":
        """Build from a sequence of ``(lo, hi)`` pairs."""
        arr = np.asarray(bounds, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        return _frozen(0.5 * (self.lower + self.upper))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def contains_box(self, other: "BoxDomain") -> bool:
        return bool(np.all(other.lower >= self.lower) and np.all(other.upper <= self.upper))

    def expanded(self, margin: float) -> "BoxDomain":
        """Box grown by ``margin * (1 + width)`` on every side."""
        pad = margin * (1.0 + self.widths)
        return BoxDomain(self.lower - pad, self.upper + pad)

    def split(self, axis: int) -> tuple["BoxDomain", "BoxDomain"]:
        mid = 0.5 * (self.lower[axis] + self.upper[axis])
        left_hi = self.upper.copy()
        left_hi[axis] = mid
        right_lo = self.lower.copy()
        right_lo[axis] = mid
        return BoxDomain(self.lower, left_hi), BoxDomain(right_lo, self.upper)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))

    def grid(self, points_per_axis: int) -> np.ndarray:
        """Full tensor grid, shape ``(points_per_axis**n, n)``, endpoints included."""
        axes = [np.linspace(l, u, points_per_axis) for l, u in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def __repr__(self) -> str:
        pairs = ", ".join(f"[{l:g}, {u:g}]" for l, u in zip(self.lower, self.upper))
        return f"BoxDomain({pairs})"


@dataclass(frozen=True, eq=False)
class Segment:
    """Ordered pair of points parameterised as ``a + t (b - a)``, t in [0, 1]."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_point(self.a, "segment start")
        b = as_point(self.b, "segment end")
        if a.shape != b.shape:
            raise DomainError(f"segment endpoints differ in dimension: {a.size} vs {b.size}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.a.size

    @property
    def d(self) -> np.ndarray:
        return self.b - self.a

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)

    def __repr__(self) -> str:
        return f"Segment({self.a.tolist()} -> {self.b.tolist()})"


def point_at(seg: Segment, gamma: float) -> np.ndarray:
    """Return ``seg.a + gamma * (seg.b - seg.a)``.

    Raises:
        DomainError: if ``gamma`` is outside ``[0, 1]``.
    """
    if not (0.0 <= gamma <= 1.0):
        raise DomainError(f"line parameter {gamma!r} outside [0, 1]")
    if gamma == 1.0:
        return seg.b
    return _frozen(seg.a + gamma * (seg.b - seg.a))


@dataclass(frozen=True, eq=False)
class LipschitzBox:
    """Per-coordinate bounds ``lo[i] <= df/dx_i <= hi[i]`` over a region.

    ``strict`` records that the bounds hold with strict inequality (open
    intervals).  Exact suprema are accepted with ``strict=False``.
    """

    lo: np.ndarray
    hi: np.ndarray
    strict: bool = False

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float, ndmin=1)
        hi = np.array(self.hi, dtype=float, ndmin=1)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
            raise DomainError(f"kappa bounds must be matching vectors, got {lo.shape} and {hi.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("kappa bounds must be finite")
        if np.any(lo > hi):
            bad = np.flatnonzero(lo > hi).tolist()
            raise DomainError(f"kappa lower bound exceeds upper bound at coordinates {bad}")
        _check_magnitude(lo, "kappa")
        _check_magnitude(hi, "kappa")
        object.__setattr__(self, "lo", _frozen(lo))
        object.__setattr__(self, "hi", _frozen(hi))

    @classmethod
    def symmetric(cls, kappa, strict: bool = False) -> "LipschitzBox":
        k = np.asarray(kappa, dtype=float)
        if np.any(k < 0):
            raise DomainError("symmetric kappa must be non-negative")
        return cls(-k, k, strict)

    @classmethod
    def degenerate(cls, value) -> "LipschitzBox":
        v = np.asarray(value, dtype=float)
        return cls(v, v, False)

    @property
    def dim(self) -> int:
        return self.lo.size

    def sym(self) -> np.ndarray:
        """Smallest symmetric constants ``kappa_i`` with ``-kappa_i <= lo_i, hi_i <= kappa_i``."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def contains(self, other: "LipschitzBox", tol=0.0) -> bool:
        return bool(np.all(self.lo <= other.lo + tol) and np.all(other.hi <= self.hi + tol))

    def inflated(self, rel: float, strict: Optional[bool] = None) -> "LipschitzBox":
        """Widen each endpoint by ``rel * (1 + |endpoint|)``."""
        s = self.strict if strict is None else strict
        return LipschitzBox(self.lo - rel * (1 + np.abs(self.lo)),
                            self.hi + rel * (1 + np.abs(self.hi)), s)

    def __repr__(self) -> str:
        return f"LipschitzBox(lo={self.lo.tolist()}, hi={self.hi.tolist()}, strict={self.strict})"


@dataclass(frozen=True, eq=False)
class CurvatureBox:
    """Entrywise bounds ``lo[i, j] <= d2f/dx_j dx_i <= hi[i, j]`` over a region.

    Both matrices must be symmetric; asymmetric input is rejected rather
    than repaired.
    """

    lo: np.ndarray
    hi: np.ndarray
    strict: bool = False

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float, ndmin=2)
        hi = np.array(self.hi, dtype=float, ndmin=2)
        if lo.ndim != 2 or lo.shape[0] != lo.shape[1] or lo.shape != hi.shape or lo.size == 0:
            raise DomainError(f"curvature bounds must be matching square matrices, got {lo.shape} and {hi.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("curvature bounds must be finite")
        if np.any(lo > hi):
            bad = [tuple(ij) for ij in np.argwhere(lo > hi).tolist()]
            raise DomainError(f"curvature lower bound exceeds upper bound at entries {bad}")
        if not (np.array_equal(lo, lo.T) and np.array_equal(hi, hi.T)):
            raise DomainError("curvature bounds must be symmetric in (i, j)")
        _check_magnitude(lo, "curvature")
        _check_magnitude(hi, "curvature")
        object.__setattr__(self, "lo", _frozen(lo))
        object.__setattr__(self, "hi", _frozen(hi))

    @classmethod
    def symmetric(cls, m, strict: bool = False) -> "CurvatureBox":
        m = np.asarray(m, dtype=float)
        if np.any(m < 0):
            raise DomainError("symmetric curvature constants must be non-negative")
        return cls(-m, m, strict)

    @classmethod
    def degenerate(cls, hessian) -> "CurvatureBox":
        h = np.asarray(hessian, dtype=float)
        return cls(h, h, False)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def sym(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def contains(self, other: "CurvatureBox", tol=0.0) -> bool:
        return bool(np.all(self.lo <= other.lo + tol) and np.all(other.hi <= self.hi + tol))

    def inflated(self, rel: float, strict: Optional[bool] = None) -> "CurvatureBox":
        s = self.strict if strict is None else strict
        return CurvatureBox(self.lo - rel * (1 + np.abs(self.lo)),
                            self.hi + rel * (1 + np.abs(self.hi)), s)

    def __repr__(self) -> str:
        return f"CurvatureBox(lo={self.lo.tolist()}, hi={self.hi.tolist()}, strict={self.strict})"


Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class FunctionModel:
    """A C^2 function on ``domain`` with optional analytic derivatives.

    Evaluators broadcast over leading axes: ``eval`` maps ``(..., n)`` to
    ``(...)``, ``grad`` to ``(..., n)`` and ``hess`` to ``(..., n, n)``.
    Set ``vectorized=False`` for callables that only accept one point; they
    are then looped over.
    """

    dim: int
    eval: Evaluator
    domain: BoxDomain
    grad: Optional[Evaluator] = None
    hess: Optional[Evaluator] = None
    name: str = "f"
    vectorized: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("model dimension must be positive")
        if self.domain.dim != self.dim:
            raise DomainError(f"domain has dimension {self.domain.dim}, model has {self.dim}")

    def _apply(self, fn: Evaluator, x, tail: tuple) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.vectorized:
            return np.asarray(fn(x), dtype=float)
        flat = x.reshape(-1, self.dim)
        out = np.array([np.asarray(fn(row), dtype=float) for row in flat])
        return out.reshape(x.shape[:-1] + tail)

    def f(self, x) -> np.ndarray:
        return self._apply(self.eval, x, ())

    def gradient(self, x) -> np.ndarray:
        if self.grad is None:
            raise DomainError(f"model {self.name!r} has no analytic gradient")
        return self._apply(self.grad, x, (self.dim,))

    def hessian(self, x) -> np.ndarray:
        if self.hess is None:
            raise DomainError(f"model {self.name!r} has no analytic Hessian")
        return self._apply(self.hess, x, (self.dim, self.dim))

    def f_scalar(self, x) -> float:
        v = float(self.f(x))
        if not np.isfinite(v):
            raise FloatingPointError(f"non-finite value of {self.name!r} at {np.asarray(x).tolist()}")
        return v


def line_derivative(model: FunctionModel, seg: Segment, gamma: float) -> float:
    """First derivative of ``t -> f(seg.a + t d)`` at ``gamma``, i.e. grad f . d."""
    x = point_at(seg, gamma)
    return float(model.gradient(x) @ seg.d)


def line_second_derivative(model: FunctionModel, seg: Segment, gamma: float) -> float:
    """Second derivative of ``t -> f(seg.a + t d)`` at ``gamma``, i.e. d^T H d."""
    x = point_at(seg, gamma)
    d = seg.d
    return float(d @ model.hessian(x) @ d)


@dataclass
class BoundReport:
    """Computed bounds for one segment, with the true change and check flags.

    ``values``, ``valid`` and ``strict_ok`` are keyed by ``(variant, locality)``.
    """

    segment: Segment
    delta_f: float
    values: dict = field(default_factory=dict)
    valid: dict = field(default_factory=dict)
    strict_ok: dict = field(default_factory=dict)

    def slack(self, key) -> float:
        variant = key[0]
        v = self.values[key]
        return self.delta_f - v if variant.endswith("lower") else v - self.delta_f

    @property
    def all_valid(self) -> bool:
        return all(self.valid.values())
