"""Pure numpy implementation of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable or when
``LIPBOUNDS_BACKEND=python`` is set.  Must stay numerically interchangeable
with ``_kernels.pyx``; ``tests/test_backends.py`` checks parity.
"""

import numpy as np

NUM_VARIANTS = 12


def bounds_batch(D, G, klo, khi, ksym, knorm, mlo, mhi, msym, mnorm):
    """All twelve bound values for a batch of displacements.

    Shapes: ``D, G, klo, khi, ksym`` are ``(N, n)``; ``mlo, mhi, msym`` are
    ``(N, n, n)``; ``knorm, mnorm`` are ``(N,)``.  Returns ``(N, 12)`` in the
    order of ``bounds.VARIANTS``.
    """
    D = np.asarray(D, dtype=float)
    N = D.shape[0]
    out = np.empty((N, NUM_VARIANTS))

    lin_lo_terms = np.minimum(klo * D, khi * D)
    lin_hi_terms = np.maximum(klo * D, khi * D)
    absd = np.abs(D)
    l1 = absd.sum(axis=1)
    sym_lin = (ksym * absd).sum(axis=1)

    out[:, 0] = lin_lo_terms.sum(axis=1)
    out[:, 1] = lin_hi_terms.sum(axis=1)
    out[:, 2] = -sym_lin
    out[:, 3] = sym_lin
    out[:, 4] = -knorm * l1
    out[:, 5] = knorm * l1

    P = D[:, :, None] * D[:, None, :]
    first = (G * D).sum(axis=1)
    quad_lo = np.minimum(mlo * P, mhi * P).sum(axis=(1, 2))
    quad_hi = np.maximum(mlo * P, mhi * P).sum(axis=(1, 2))
    sym_quad = (msym * np.abs(P)).sum(axis=(1, 2))
    sq = (D * D).sum(axis=1)

    out[:, 6] = first + 0.5 * quad_lo
    out[:, 7] = first + 0.5 * quad_hi
    out[:, 8] = first - 0.5 * sym_quad
    out[:, 9] = first + 0.5 * sym_quad
    out[:, 10] = first - 0.5 * mnorm * sq
    out[:, 11] = first + 0.5 * mnorm * sq
    return out


def _endpoint_extremes(c_lo, c_hi, d_lo, d_hi):
    """Min and max of ``min/max(c_lo*t, c_hi*t)`` for t in ``[d_lo, d_hi]``."""
    cand = np.stack([c_lo * d_lo, c_hi * d_lo, c_lo * d_hi, c_hi * d_hi])
    return cand.min(axis=0), cand.max(axis=0)


def enclose_linear(f0, anchor, lower, upper, klo, khi):
    """Return ``(lo, hi, witness)`` of the first-order enclosure."""
    dl = np.asarray(lower, dtype=float) - anchor
    du = np.asarray(upper, dtype=float) - anchor
    at_lo = np.minimum(klo * dl, khi * dl)
    at_hi = np.minimum(klo * du, khi * du)
    tmin, tmax = _endpoint_extremes(klo, khi, dl, du)
    witness = np.where(at_hi < at_lo, upper, lower)
    return f0 + float(tmin.sum()), f0 + float(tmax.sum()), witness


def _diag_extreme(g, c, dl, du, lowest):
    """Extreme of ``g*t + c*t^2/2`` over ``t`` in ``[dl, du]`` and its argument."""
    cand = np.stack([dl, du, dl])
    safe = np.where(c != 0, c, 1.0)
    v = -g / safe
    inside = (c > 0 if lowest else c < 0) & (v > dl) & (v < du)
    cand[2] = np.where(inside, v, dl)
    vals = g * cand + 0.5 * c * cand * cand
    k = vals.argmin(axis=0) if lowest else vals.argmax(axis=0)
    cols = np.arange(g.size)
    return vals[k, cols], cand[k, cols]


def enclose_quadratic(f0, grad, anchor, lower, upper, mlo, mhi):
    """Return ``(lo, hi, witness)`` of the second-order enclosure.

    The gradient term and the diagonal curvature term share ``d_i``, and
    since ``d_i^2 >= 0`` they combine into one exact 1-d quadratic per
    coordinate.  Off-diagonal terms use interval products.
    """
    anchor = np.asarray(anchor, dtype=float)
    dl = np.asarray(lower, dtype=float) - anchor
    du = np.asarray(upper, dtype=float) - anchor
    g = np.asarray(grad, dtype=float)
    mlo = np.asarray(mlo, dtype=float)
    mhi = np.asarray(mhi, dtype=float)

    diag_lo, t_lo = _diag_extreme(g, np.diag(mlo).copy(), dl, du, True)
    diag_hi, _ = _diag_extreme(g, np.diag(mhi).copy(), dl, du, False)
    witness = anchor + t_lo

    prods = np.stack([
        dl[:, None] * dl[None, :],
        dl[:, None] * du[None, :],
        du[:, None] * dl[None, :],
        du[:, None] * du[None, :],
    ])
    p_lo = prods.min(axis=0)
    p_hi = prods.max(axis=0)
    qmin, qmax = _endpoint_extremes(mlo, mhi, p_lo, p_hi)
    idx = np.arange(dl.size)
    qmin[idx, idx] = 0.0
    qmax[idx, idx] = 0.0
    lo = f0 + float(diag_lo.sum()) + 0.5 * float(qmin.sum())
    hi = f0 + float(diag_hi.sum()) + 0.5 * float(qmax.sum())
    return lo, hi, witness
