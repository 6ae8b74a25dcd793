"""Certified Lipschitz bounds, range enclosures and branch-and-bound.

Given interval bounds on the first (and second) partial derivatives of a C^2
function over a box, :mod:`lipbounds.bounds` bounds ``f(b) - f(a)`` for any
pair of points in the box.  :mod:`lipbounds.solver` turns those bounds into
range enclosures and a global minimiser.
"""

from ._backend import BACKEND
from .bounds import (
    VARIANTS,
    BoundVariant,
    all_bounds,
    bounds_batch,
    kappa_norm,
    linear_lower,
    linear_upper,
    m_norm,
    norm_linear_lower,
    norm_linear_upper,
    norm_quadratic_lower,
    norm_quadratic_upper,
    quadratic_lower,
    quadratic_upper,
    symmetric_linear_lower,
    symmetric_linear_upper,
    symmetric_quadratic_lower,
    symmetric_quadratic_upper,
)
from .core import (
    BoundReport,
    BoxDomain,
    CurvatureBox,
    DomainError,
    FunctionModel,
    LipschitzBox,
    Segment,
    as_point,
    point_at,
)
from .corpus import corpus_list, get_entry
from .estimation import (
    EstimationConfig,
    estimate_kappa,
    estimate_M,
    estimate_segment_kappa,
    estimate_segment_M,
    fd_gradient,
    fd_hessian,
)
from .solver import BnBResult, Enclosure, enclose_linear, enclose_quadratic, minimize

__version__ = "0.1.0"
