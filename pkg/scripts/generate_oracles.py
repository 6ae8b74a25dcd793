#!/usr/bin/env python3
"""Brute-force oracle constants and minima for the corpus.

For every corpus function: evaluate the analytic gradient and Hessian on a
dense grid (at least 10^6 points), then polish each extreme and the global
minimum with bounded L-BFGS-B started from the best grid points.

Entries without closed forms are written to src/lipbounds/data/oracles.json,
widened outward by PAD * (1 + |v|).  Closed-form entries are only compared
against the brute-force values and the discrepancy is printed.

Usage: python scripts/generate_oracles.py [--check]
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from lipbounds import corpus  # noqa: E402
from lipbounds.core import BoxDomain  # noqa: E402

GENERATED = ("rosenbrock", "six_hump_camel", "logsumexp")
PAD = 1e-12
MIN_POINTS = 10**6
STARTS = 8


def dense_grid(box):
    n = box.dim
    per_axis = int(np.ceil(MIN_POINTS ** (1.0 / n)))
    if n > 3:
        # tensor grid would be too big; stratified random points plus vertices
        rng = np.random.default_rng(12345)
        return np.vstack([box.sample(rng, MIN_POINTS), box.grid(2)])
    return box.grid(per_axis + (per_axis % 2 == 0))


def polish(fun, x0s, box, sign):
    """Optimise sign * fun over box from several starts, return best value."""
    bounds = list(zip(box.lower, box.upper))
    best = np.inf
    for x0 in x0s:
        res = minimize(lambda x: sign * float(fun(x)), x0, method="L-BFGS-B", bounds=bounds,
                       options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500})
        best = min(best, res.fun)
    return sign * best


def extremes(values, X, component, box):
    """Refined (min, max) of one derivative component."""
    flat = values
    lo_idx = np.argsort(flat)[:STARTS]
    hi_idx = np.argsort(flat)[-STARTS:]
    lo = min(flat.min(), polish(component, X[lo_idx], box, 1.0))
    hi = max(flat.max(), polish(component, X[hi_idx], box, -1.0))
    return lo, hi


def oracle_for(name):
    make, bounds = corpus.FUNCTIONS[name]
    fn = make()
    box = BoxDomain.from_bounds(bounds)
    n = box.dim
    X = dense_grid(box)
    G = fn.grad(X)
    H = fn.hess(X)
    H = 0.5 * (H + np.swapaxes(H, -1, -2))
    klo, khi = np.empty(n), np.empty(n)
    for i in range(n):
        klo[i], khi[i] = extremes(G[:, i], X, lambda x, i=i: fn.grad(x)[i], box)
    mlo, mhi = np.empty((n, n)), np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            comp = lambda x, i=i, j=j: 0.5 * (fn.hess(x)[i, j] + fn.hess(x)[j, i])
            lo, hi = extremes(H[:, i, j], X, comp, box)
            mlo[i, j] = mlo[j, i] = lo
            mhi[i, j] = mhi[j, i] = hi
    F = fn.f(X)
    idx = np.argsort(F)[:STARTS]
    bnds = list(zip(box.lower, box.upper))
    best = (np.inf, None)
    for x0 in X[idx]:
        res = minimize(lambda x: float(fn.f(x)), x0, jac=lambda x: fn.grad(x), method="L-BFGS-B",
                       bounds=bnds, options={"ftol": 1e-16, "gtol": 1e-14, "maxiter": 1000})
        if res.fun < best[0]:
            best = (float(res.fun), res.x)
    return {
        "points": int(X.shape[0]),
        "kappa_lo": klo, "kappa_hi": khi, "m_lo": mlo, "m_hi": mhi,
        "grid_min": float(F.min()),
        "known_min": {"value": best[0], "point": best[1].tolist()},
    }


def pad_out(lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo - PAD * (1 + np.abs(lo)), hi + PAD * (1 + np.abs(hi))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="compare with the stored file instead of writing")
    args = ap.parse_args(argv)

    closed = corpus._closed_form_oracles()
    out = {"generator": "scripts/generate_oracles.py", "pad": PAD, "entries": {}}
    for name in corpus.FUNCTIONS:
        rec = oracle_for(name)
        print(f"{name}: {rec['points']} grid points, min {rec['known_min']['value']:.12g} "
              f"at {np.round(rec['known_min']['point'], 10).tolist()}")
        if name in closed:
            k, m, known = closed[name]
            dk = max(np.max(np.abs(k.lo - rec["kappa_lo"])), np.max(np.abs(k.hi - rec["kappa_hi"])))
            dm = max(np.max(np.abs(m.lo - rec["m_lo"])), np.max(np.abs(m.hi - rec["m_hi"])))
            dmin = abs(known[0] - rec["known_min"]["value"]) if known else float("nan")
            print(f"  closed form vs brute force: kappa {dk:.2e}, M {dm:.2e}, min {dmin:.2e}")
            continue
        klo, khi = pad_out(rec["kappa_lo"], rec["kappa_hi"])
        mlo, mhi = pad_out(rec["m_lo"], rec["m_hi"])
        mlo = np.minimum(mlo, mlo.T)
        mhi = np.maximum(mhi, mhi.T)
        print(f"  kappa lo {klo.tolist()}\n  kappa hi {khi.tolist()}")
        print(f"  M lo {mlo.tolist()}\n  M hi {mhi.tolist()}")
        out["entries"][name] = {
            "grid_points": rec["points"],
            "kappa_lo": klo.tolist(), "kappa_hi": khi.tolist(),
            "m_lo": mlo.tolist(), "m_hi": mhi.tolist(),
            "known_min": rec["known_min"],
        }

    path = ROOT / "src" / "lipbounds" / "data" / "oracles.json"
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.check:
        same = path.exists() and path.read_text() == text
        print("stored oracles", "match" if same else "DIFFER")
        return 0 if same else 1
    path.write_text(text)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
