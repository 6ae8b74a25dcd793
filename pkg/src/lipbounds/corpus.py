"""Built-in test functions with analytic derivatives and oracle constants.

Oracle constants are exact derivative extremes over each entry's box.  The
simple entries have closed forms written inline.  Rosenbrock, the six-hump
camel and log-sum-exp use values produced by ``scripts/generate_oracles.py``
(dense grid plus local refinement) and stored in ``data/oracles.json``.
Every entry checks its oracle against a sampled grid when first loaded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable, Optional

import numpy as np

from .core import BoxDomain, CurvatureBox, FunctionModel, LipschitzBox

__all__ = ["CorpusEntry", "CorpusError", "corpus_list", "corpus_names", "get_entry", "FUNCTIONS"]

# Corpus models are entire functions; their domain is the box grown by this
# fraction so that finite-difference stencils at the box faces are valid.
DOMAIN_MARGIN = 1e-2


class CorpusError(LookupError):
    pass


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    name: str
    model: FunctionModel
    box: BoxDomain
    kappa_oracle: LipschitzBox
    m_oracle: CurvatureBox
    known_min: Optional[tuple] = None  # (value, point)

    @property
    def dim(self) -> int:
        return self.box.dim

    def model_on(self, box: BoxDomain) -> FunctionModel:
        """Same function with its domain widened to cover ``box``."""
        return _make_model(self.name, box)


@dataclass(frozen=True)
class _Fn:
    f: Callable
    grad: Callable
    hess: Callable


def _stack_last(*cols):
    return np.stack(np.broadcast_arrays(*cols), axis=-1)


def _mat(rows):
    return np.stack([_stack_last(*r) for r in rows], axis=-2)


# -- affine ---------------------------------------------------------------
_AFF_C = np.array([1.5, -0.7])


def _affine():
    def f(x):
        return x @ _AFF_C + 0.3

    def g(x):
        return np.broadcast_to(_AFF_C, x.shape).copy()

    def h(x):
        return np.zeros(x.shape + (2,))

    return _Fn(f, g, h)


# -- quadratics -----------------------------------------------------------
_SHIFT = np.array([0.3, -0.2])


def _quad_shifted():
    def f(x):
        return np.sum((x - _SHIFT) ** 2, axis=-1)

    def g(x):
        return 2.0 * (x - _SHIFT)

    def h(x):
        return np.broadcast_to(2.0 * np.eye(2), x.shape + (2,)).copy()

    return _Fn(f, g, h)


_COUPLED_H = np.array([[2.0, 1.0], [1.0, 3.0]])
_COUPLED_C = np.array([-1.0, 0.0])


def _quad_coupled():
    # x^2 + x y + 1.5 y^2 - x
    def f(x):
        return 0.5 * np.einsum("...i,ij,...j->...", x, _COUPLED_H, x) + x @ _COUPLED_C

    def g(x):
        return x @ _COUPLED_H + _COUPLED_C

    def h(x):
        return np.broadcast_to(_COUPLED_H, x.shape + (2,)).copy()

    return _Fn(f, g, h)


# -- univariate polynomials -----------------------------------------------

def _cubic():
    return _Fn(lambda x: x[..., 0] ** 3,
               lambda x: 3.0 * x ** 2,
               lambda x: (6.0 * x)[..., None])


def _quartic():
    return _Fn(lambda x: x[..., 0] ** 4,
               lambda x: 4.0 * x ** 3,
               lambda x: (12.0 * x ** 2)[..., None])


# -- trigonometric --------------------------------------------------------

def _sincos():
    def f(x):
        return np.sin(x[..., 0]) * np.cos(x[..., 1])

    def g(x):
        s0, c0 = np.sin(x[..., 0]), np.cos(x[..., 0])
        s1, c1 = np.sin(x[..., 1]), np.cos(x[..., 1])
        return _stack_last(c0 * c1, -s0 * s1)

    def h(x):
        s0, c0 = np.sin(x[..., 0]), np.cos(x[..., 0])
        s1, c1 = np.sin(x[..., 1]), np.cos(x[..., 1])
        return _mat([[-s0 * c1, -c0 * s1], [-c0 * s1, -s0 * c1]])

    return _Fn(f, g, h)


def _sin_sum():
    def f(x):
        return np.sum(np.sin(x), axis=-1)

    def g(x):
        return np.cos(x)

    def h(x):
        out = np.zeros(x.shape + (x.shape[-1],))
        idx = np.arange(x.shape[-1])
        out[..., idx, idx] = -np.sin(x)
        return out

    return _Fn(f, g, h)


# -- classic benchmarks ---------------------------------------------------

def _rosenbrock():
    def f(x):
        u, v = x[..., 0], x[..., 1]
        return (1.0 - u) ** 2 + 100.0 * (v - u * u) ** 2

    def g(x):
        u, v = x[..., 0], x[..., 1]
        w = v - u * u
        return _stack_last(-2.0 * (1.0 - u) - 400.0 * u * w, 200.0 * w)

    def h(x):
        u, v = x[..., 0], x[..., 1]
        return _mat([[2.0 - 400.0 * v + 1200.0 * u * u, -400.0 * u],
                     [-400.0 * u, 200.0 + 0.0 * u]])

    return _Fn(f, g, h)


def _camel():
    def f(x):
        u, v = x[..., 0], x[..., 1]
        return (4.0 - 2.1 * u**2 + u**4 / 3.0) * u**2 + u * v + (-4.0 + 4.0 * v**2) * v**2

    def g(x):
        u, v = x[..., 0], x[..., 1]
        return _stack_last(8.0 * u - 8.4 * u**3 + 2.0 * u**5 + v, u - 8.0 * v + 16.0 * v**3)

    def h(x):
        u, v = x[..., 0], x[..., 1]
        one = 1.0 + 0.0 * u
        return _mat([[8.0 - 25.2 * u**2 + 10.0 * u**4, one],
                     [one, -8.0 + 48.0 * v**2]])

    return _Fn(f, g, h)


def _logsumexp():
    def _p(x):
        m = np.max(x, axis=-1, keepdims=True)
        e = np.exp(x - m)
        return e / e.sum(axis=-1, keepdims=True)

    def f(x):
        m = np.max(x, axis=-1)
        return m + np.log(np.sum(np.exp(x - m[..., None]), axis=-1))

    def h(x):
        p = _p(x)
        return np.einsum("...i,ij->...ij", p, np.eye(x.shape[-1])) - p[..., :, None] * p[..., None, :]

    return _Fn(f, _p, h)


FUNCTIONS: dict[str, tuple[Callable[[], _Fn], list]] = {
    "affine": (_affine, [(-1, 1), (-2, 2)]),
    "quad_shifted": (_quad_shifted, [(-1, 1), (-1, 1)]),
    "quadratic_coupled": (_quad_coupled, [(-1, 1), (-1, 1)]),
    "cubic": (_cubic, [(-1, 1)]),
    "quartic": (_quartic, [(-1, 1)]),
    "sincos": (_sincos, [(0, np.pi), (0, np.pi)]),
    "rosenbrock": (_rosenbrock, [(-2, 2), (-1, 3)]),
    "six_hump_camel": (_camel, [(-2, 2), (-1, 1)]),
    "sin_sum": (_sin_sum, [(-1, 2)] * 5),
    "logsumexp": (_logsumexp, [(-1, 1)] * 3),
}


def _make_model(name: str, box: BoxDomain) -> FunctionModel:
    fn = FUNCTIONS[name][0]()
    return FunctionModel(dim=box.dim, eval=fn.f, grad=fn.grad, hess=fn.hess,
                         domain=box.expanded(DOMAIN_MARGIN), name=name)


def _closed_form_oracles() -> dict:
    c2, s1 = np.cos(2.0), np.sin(1.0)
    return {
        "affine": (
            LipschitzBox.degenerate(_AFF_C),
            CurvatureBox.degenerate(np.zeros((2, 2))),
            (-2.6, (-1.0, 2.0)),
        ),
        # d/dx = 2(x - 0.3) on [-1, 1], d/dy = 2(y + 0.2) on [-1, 1]
        "quad_shifted": (
            LipschitzBox([-2.6, -1.6], [1.4, 2.4]),
            CurvatureBox.degenerate(2.0 * np.eye(2)),
            (0.0, (0.3, -0.2)),
        ),
        # gradient (2x + y - 1, x + 3y) is affine, extremes at the corners
        "quadratic_coupled": (
            LipschitzBox([-4.0, -4.0], [2.0, 4.0]),
            CurvatureBox.degenerate(_COUPLED_H),
            (-0.3, (0.6, -0.2)),
        ),
        "cubic": (LipschitzBox([0.0], [3.0]), CurvatureBox([[-6.0]], [[6.0]]), (-1.0, (-1.0,))),
        "quartic": (LipschitzBox([-4.0], [4.0]), CurvatureBox([[0.0]], [[12.0]]), (0.0, (0.0,))),
        "sincos": (
            LipschitzBox([-1.0, -1.0], [1.0, 0.0]),
            CurvatureBox(-np.ones((2, 2)), np.ones((2, 2))),
            (-1.0, (np.pi / 2, np.pi)),
        ),
        # cos on [-1, 2] spans [cos 2, 1]; -sin spans [-1, sin 1]
        "sin_sum": (
            LipschitzBox(np.full(5, c2), np.ones(5)),
            CurvatureBox(np.diag(np.full(5, -1.0)), np.diag(np.full(5, s1))),
            (float(-5.0 * s1), (-1.0,) * 5),
        ),
    }


def _load_generated() -> dict:
    text = resources.files("lipbounds").joinpath("data/oracles.json").read_text()
    raw = json.loads(text)
    out = {}
    for name, rec in raw["entries"].items():
        k = LipschitzBox(rec["kappa_lo"], rec["kappa_hi"])
        m = CurvatureBox(rec["m_lo"], rec["m_hi"])
        km = rec.get("known_min")
        out[name] = (k, m, None if km is None else (km["value"], tuple(km["point"])))
    return out


def _self_check(entry: CorpusEntry, points: int = 4096) -> None:
    n = entry.dim
    per_axis = max(2, int(round(points ** (1.0 / n))))
    if per_axis ** n > 4 * points:
        rng = np.random.default_rng(0)
        X = entry.box.sample(rng, points)
    else:
        X = entry.box.grid(per_axis)
    G = entry.model.gradient(X)
    H = entry.model.hessian(X)
    k, m = entry.kappa_oracle, entry.m_oracle

    def slack(v):
        return 1e-12 * (1.0 + np.abs(v))

    if np.any(G < k.lo - slack(k.lo)) or np.any(G > k.hi + slack(k.hi)):
        raise CorpusError(f"kappa oracle of {entry.name!r} misses sampled gradient values")
    if np.any(H < m.lo - slack(m.lo)) or np.any(H > m.hi + slack(m.hi)):
        raise CorpusError(f"curvature oracle of {entry.name!r} misses sampled Hessian values")


@lru_cache(maxsize=None)
def _entries() -> tuple:
    oracles = _closed_form_oracles()
    oracles.update(_load_generated())
    entries = []
    for name, (_, bounds) in FUNCTIONS.items():
        box = BoxDomain.from_bounds(bounds)
        k, m, known = oracles[name]
        entry = CorpusEntry(name, _make_model(name, box), box, k, m, known)
        _self_check(entry)
        entries.append(entry)
    return tuple(entries)


def corpus_list() -> list:
    return list(_entries())


def corpus_names() -> list:
    return list(FUNCTIONS)


def get_entry(name: str) -> CorpusEntry:
    for e in _entries():
        if e.name == name:
            return e
    raise CorpusError(f"unknown corpus function {name!r}; known: {', '.join(FUNCTIONS)}")
