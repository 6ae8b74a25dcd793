"""Range enclosures over boxes and a best-first branch-and-bound minimiser.

Both enclosures evaluate the pairwise bounds from a fixed anchor to every
point of a box.  Each per-coordinate (or per-pair) term has its extreme over an interval at an
endpoint or, for the diagonal quadratic part, at a vertex; all are found in
closed form.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ._backend import kernels
from .core import BoxDomain, CurvatureBox, DomainError, FunctionModel, LipschitzBox
from .estimation import EstimationConfig, estimate_kappa, estimate_M, fd_gradient

__all__ = [
    "Enclosure",
    "BnBResult",
    "TraceRow",
    "enclose_linear",
    "enclose_quadratic",
    "minimize",
]


@dataclass(frozen=True, eq=False)
class Enclosure:
    """Interval ``[lo, hi]`` containing every value of f on a box.

    ``witness_lo`` is the point whose coordinates realise the separable
    part of ``lo``; ``anchor`` is the expansion point.
    """

    lo: float
    hi: float
    witness_lo: np.ndarray
    anchor: np.ndarray

    def contains(self, values, tol: float = 0.0) -> bool:
        v = np.asarray(values)
        return bool(np.all(v >= self.lo - tol) and np.all(v <= self.hi + tol))


def _check_anchor(anchor, box: BoxDomain) -> np.ndarray:
    x = np.asarray(anchor, dtype=float)
    if x.shape != (box.dim,):
        raise DomainError(f"anchor has shape {x.shape}, box dimension is {box.dim}")
    if not box.contains(x):
        raise DomainError(f"anchor {x.tolist()} lies outside {box!r}")
    return x


def enclose_linear(f_at_anchor: float, anchor, box: BoxDomain, k: LipschitzBox, kernel=None) -> Enclosure:
    """First-order enclosure of f over ``box`` from its value at ``anchor``."""
    x = _check_anchor(anchor, box)
    if k.dim != box.dim:
        raise DomainError(f"kappa has dimension {k.dim}, box has {box.dim}")
    kern = kernels if kernel is None else kernel
    lo, hi, w = kern.enclose_linear(float(f_at_anchor), x, box.lower, box.upper, k.lo, k.hi)
    return Enclosure(lo, hi, w, x)


def enclose_quadratic(f_at_anchor: float, grad_at_anchor, anchor, box: BoxDomain,
                      m: CurvatureBox, kernel=None) -> Enclosure:
    """Second-order enclosure of f over ``box``.

    Since ``d_i^2 >= 0`` the diagonal term reduces to ``Mlo_ii d_i^2`` (or
    ``Mhi_ii d_i^2``), which joins the gradient term in a 1-d quadratic
    minimised exactly per coordinate; separable quadratics are therefore
    enclosed exactly.  Cross products ``d_i d_j`` are bounded by
    four-product interval multiplication, ignoring correlation.
    ``witness_lo`` is the per-coordinate minimiser of the separable part.
    """
    x = _check_anchor(anchor, box)
    if m.dim != box.dim:
        raise DomainError(f"curvature has dimension {m.dim}, box has {box.dim}")
    g = np.asarray(grad_at_anchor, dtype=float)
    if g.shape != (box.dim,) or not np.all(np.isfinite(g)):
        raise DomainError("gradient at anchor must be a finite vector matching the box")
    kern = kernels if kernel is None else kernel
    lo, hi, w = kern.enclose_quadratic(float(f_at_anchor), g, x, box.lower, box.upper, m.lo, m.hi)
    return Enclosure(lo, hi, w, x)


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    queue_size: int
    incumbent: float
    certified_lower: float
    gap: float


@dataclass
class BnBResult:
    best_value: float
    best_point: np.ndarray
    certified_lower: float
    gap: float
    iterations: int
    boxes_pruned: int
    converged: bool
    empirical: bool = False
    trace: list = field(default_factory=list, repr=False)


Constants = Union[LipschitzBox, CurvatureBox, Sequence]


def _split_constants(constants: Constants):
    items = constants if isinstance(constants, (list, tuple)) else [constants]
    k = m = None
    for c in items:
        if isinstance(c, LipschitzBox):
            k = c
        elif isinstance(c, CurvatureBox):
            m = c
        elif c is not None:
            raise TypeError(f"unsupported constant container {type(c).__name__}")
    return k, m


class _Evaluator:
    def __init__(self, model, k, m, local: Optional[EstimationConfig], fd_step: float):
        self.model = model
        self.k = k
        self.m = m
        self.local = local
        self.fd_step = fd_step

    def gradient(self, x):
        if self.model.grad is not None:
            return self.model.gradient(x)
        return fd_gradient(self.model, x, self.fd_step)

    def __call__(self, box: BoxDomain):
        """Return ``(f(center), center, lower bound over box)``."""
        c = box.center
        fc = self.model.f_scalar(c)
        k, m = self.k, self.m
        if self.local is not None:
            k = estimate_kappa(self.model, box, self.local) if k is not None else None
            m = estimate_M(self.model, box, self.local) if m is not None else None
        lo = -np.inf
        if m is not None:
            lo = enclose_quadratic(fc, self.gradient(c), c, box, m).lo
        if k is not None:
            lo = max(lo, enclose_linear(fc, c, box, k).lo)
        return fc, c, lo


def minimize(model: FunctionModel, box: BoxDomain, constants: Constants, tol: float = 1e-6,
             budget: int = 100_000, local: Optional[EstimationConfig] = None,
             fd_step: float = 1e-5, record_trace: bool = True) -> BnBResult:
    """Best-first branch-and-bound for the global minimum of f over ``box``.

    Sub-boxes are ordered by their enclosure lower bound (ties by creation
    order), anchored at their centres, and split at the midpoint of their
    longest side.  With both constant kinds given, the larger of the two
    lower bounds is used.  A box is discarded once its bound reaches
    ``incumbent - tol``.

    ``local`` switches to re-estimating constants on each sub-box with the
    given configuration.  Sampled constants are not certified, so the
    result is then flagged ``empirical``.

    Running out of ``budget`` iterations is not an error; the result has
    ``converged=False`` and the honest gap.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if budget < 0:
        raise ValueError("budget must be non-negative")
    k, m = _split_constants(constants)
    if k is None and m is None:
        raise ValueError("minimize needs a LipschitzBox and/or a CurvatureBox")
    for c in (k, m):
        if c is not None and c.dim != box.dim:
            raise DomainError(f"constants have dimension {c.dim}, box has {box.dim}")
    if not model.domain.contains_box(box):
        raise DomainError(f"{box!r} is not inside the domain of {model.name!r}")

    evaluate = _Evaluator(model, k, m, local, fd_step)
    counter = itertools.count()
    fc, c, lo = evaluate(box)
    best_value, best_point = fc, c
    heap = [(lo, next(counter), box)]
    pruned_lo = np.inf
    pruned = 0
    iterations = 0
    trace = []
    converged = False

    while heap:
        head_lo = heap[0][0]
        if head_lo >= best_value - tol:
            # every remaining box is prunable
            pruned_lo = min(pruned_lo, head_lo)
            pruned += len(heap)
            heap.clear()
            converged = True
            break
        if iterations >= budget:
            break
        parent_lo, _, parent = heapq.heappop(heap)
        iterations += 1
        axis = int(np.argmax(parent.widths))
        for child in parent.split(axis):
            fc, c, lo = evaluate(child)
            # the parent's bound also holds on the child
            lo = max(lo, parent_lo)
            if fc < best_value:
                best_value, best_point = fc, c
            if lo >= best_value - tol:
                pruned_lo = min(pruned_lo, lo)
                pruned += 1
            else:
                heapq.heappush(heap, (lo, next(counter), child))
        if record_trace:
            cert = min(heap[0][0] if heap else np.inf, pruned_lo, best_value)
            trace.append(TraceRow(iterations, len(heap), best_value, cert, best_value - cert))

    certified = min(heap[0][0] if heap else np.inf, pruned_lo)
    certified = min(certified, best_value)
    gap = best_value - certified
    converged = converged or gap <= tol
    if record_trace and (not trace or trace[-1].certified_lower != certified):
        trace.append(TraceRow(iterations, len(heap), best_value, certified, gap))
    return BnBResult(
        best_value=best_value,
        best_point=np.asarray(best_point),
        certified_lower=certified,
        gap=gap,
        iterations=iterations,
        boxes_pruned=pruned,
        converged=bool(converged and gap <= tol),
        empirical=local is not None,
        trace=trace,
    )
