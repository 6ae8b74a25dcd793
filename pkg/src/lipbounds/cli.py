"""Batch command-line front end.

Commands (``--cmd``): ``bound``, ``estimate``, ``enclose``, ``verify`` and
``minimize``.  Settings come from flags and/or a flat ``key=value`` config
file (``--config``); flags win.  Reports are CSV or JSON lines, with floats
written to 17 significant digits.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numeric
failure.

Report layouts
--------------
bound     function,variant,locality,delta_f,bound_value,valid,strict_ok,slack
estimate  constants-file rows: ``kappa,i,lo,hi`` and ``M,i,j,lo,hi`` (1-based)
enclose   flavor,lo,hi,anchor,witness_lo
verify    pair,seed,function,variant,locality,delta_f,bound_value,valid,strict_ok,slack
minimize  kind,iteration,queue_size,incumbent,certified_lower,gap,best_point,converged,boxes_pruned
          one ``trace`` row per iteration, then a single ``result`` row
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BoxDomain, CurvatureBox, DomainError, FunctionModel, LipschitzBox, Segment
from .corpus import CorpusError, get_entry
from .estimation import (EstimationConfig, EstimationError, estimate_kappa, estimate_M,
                         estimate_segment_kappa, estimate_segment_M, fd_gradient)
from .expr import Expression, ExpressionError
from .harness import sample_segments, verify_segments
from .solver import enclose_linear, enclose_quadratic, minimize

log = logging.getLogger("lipbounds")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("bound", "estimate", "enclose", "verify", "minimize")
STRICT_INFLATION = 1e-6
STRICT_MIN_STEP = 1e-3
EXPR_DOMAIN_MARGIN = 1e-2

HEADERS = {
    "bound": ["function", "variant", "locality", "delta_f", "bound_value", "valid", "strict_ok", "slack"],
    "enclose": ["flavor", "lo", "hi", "anchor", "witness_lo"],
    "verify": ["pair", "seed", "function", "variant", "locality", "delta_f", "bound_value",
               "valid", "strict_ok", "slack"],
    "minimize": ["kind", "iteration", "queue_size", "incumbent", "certified_lower", "gap",
                 "best_point", "converged", "boxes_pruned"],
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    function: str
    box: Optional[BoxDomain] = None
    xa: Optional[np.ndarray] = None
    xb: Optional[np.ndarray] = None
    seed: int = 0
    pairs: int = 1000
    tol: float = 1e-6
    budget: int = 100_000
    constants: Optional[str] = None
    out: Optional[str] = None
    format: str = "csv"
    local: bool = False
    strict: bool = False


# -- parsing helpers ------------------------------------------------------

def parse_box(text: str) -> BoxDomain:
    try:
        pairs = [tuple(float(v) for v in part.split(":")) for part in text.split(",")]
        if any(len(p) != 2 for p in pairs):
            raise ValueError
        return BoxDomain.from_bounds(pairs)
    except (ValueError, DomainError) as exc:
        raise UsageError(f"malformed box {text!r}; expected 'lo1:hi1,lo2:hi2,...' ({exc})") from None


def parse_vector(text: str, what: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"malformed {what} {text!r}; expected 'v1,v2,...'") from None
    if not np.all(np.isfinite(v)):
        raise UsageError(f"{what} must be finite")
    return v


def read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                key, val = line.split("=", 1)
                values[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    return values


def read_constants(path: str, dim: int):
    """Parse a constants file into ``(LipschitzBox | None, CurvatureBox | None)``.

    Rows are ``kappa,i,lo,hi`` and ``M,i,j,lo,hi`` with 1-based indices.
    Blank lines and lines starting with ``#`` are ignored.  Every index must
    be covered once the kind appears; unlisted Hessian pairs are an error.
    """
    klo, khi = np.full(dim, np.nan), np.full(dim, np.nan)
    mlo, mhi = np.full((dim, dim), np.nan), np.full((dim, dim), np.nan)
    seen_k = seen_m = False
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                    continue
                kind = row[0].strip()
                try:
                    if kind == "kappa" and len(row) == 4:
                        i = int(row[1]) - 1
                        if not 0 <= i < dim:
                            raise IndexError
                        klo[i], khi[i] = float(row[2]), float(row[3])
                        seen_k = True
                    elif kind == "M" and len(row) == 5:
                        i, j = int(row[1]) - 1, int(row[2]) - 1
                        if not (0 <= i < dim and 0 <= j < dim):
                            raise IndexError
                        mlo[i, j], mhi[i, j] = float(row[3]), float(row[4])
                        seen_m = True
                    else:
                        raise ValueError
                except (ValueError, IndexError):
                    raise UsageError(f"{path}:{lineno}: malformed constants row {row!r}") from None
    except OSError as exc:
        raise UsageError(f"cannot read constants file: {exc}") from None
    kappa = m = None
    try:
        if seen_k:
            if np.any(np.isnan(klo)):
                raise UsageError(f"{path}: kappa rows missing for some coordinates")
            kappa = LipschitzBox(klo, khi)
        if seen_m:
            # a single (i, j) row stands for both orders
            mlo = np.where(np.isnan(mlo), mlo.T, mlo)
            mhi = np.where(np.isnan(mhi), mhi.T, mhi)
            if np.any(np.isnan(mlo)):
                raise UsageError(f"{path}: M rows missing for some pairs")
            m = CurvatureBox(mlo, mhi)
    except DomainError as exc:
        raise UsageError(f"{path}: {exc}") from None
    return kappa, m


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lipbounds", description="Lipschitz bounds toolkit",
                                epilog="Flags override values from --config.")
    p.add_argument("--cmd", choices=COMMANDS)
    p.add_argument("--fn", help="corpus name or 'expr:<expression in x1..xn>'")
    p.add_argument("--box", help="'lo1:hi1,lo2:hi2,...'")
    p.add_argument("--xa", help="segment start / enclosure anchor, 'v1,v2,...'")
    p.add_argument("--xb", help="segment end, 'v1,v2,...'")
    p.add_argument("--seed", type=int)
    p.add_argument("--pairs", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--constants", help="constants CSV file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--local", action="store_true", default=None, help="also use segment-local constants")
    p.add_argument("--strict", action="store_true", default=None,
                   help=f"inflate constants by {STRICT_INFLATION:g} and check strict inequalities")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


_VALUE_FLAGS = ("--box", "--xa", "--xb")


def _glue_negative_values(argv):
    """Rewrite ``--box -1:1`` as ``--box=-1:1`` so argparse accepts it."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def build_config(argv) -> RunConfig:
    parser = _build_parser()
    parser.__class__ = _Parser
    args = parser.parse_args(_glue_negative_values(list(argv)))
    merged = read_config_file(args.config) if args.config else {}
    for key, val in vars(args).items():
        if val is not None and key not in ("config", "verbose"):
            merged[key] = val
    known = {"cmd", "fn", "box", "xa", "xb", "seed", "pairs", "tol", "budget", "constants",
             "out", "format", "local", "strict"}
    unknown = set(merged) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if merged.get("cmd") not in COMMANDS:
        raise UsageError(f"--cmd must be one of {', '.join(COMMANDS)}")
    if not merged.get("fn"):
        raise UsageError("--fn is required")
    try:
        cfg = RunConfig(
            command=merged["cmd"],
            function=str(merged["fn"]),
            box=parse_box(merged["box"]) if merged.get("box") else None,
            xa=parse_vector(merged["xa"], "--xa") if merged.get("xa") else None,
            xb=parse_vector(merged["xb"], "--xb") if merged.get("xb") else None,
            seed=int(merged.get("seed", 0)),
            pairs=int(merged.get("pairs", 1000)),
            tol=float(merged.get("tol", 1e-6)),
            budget=int(merged.get("budget", 100_000)),
            constants=merged.get("constants"),
            out=merged.get("out"),
            format=str(merged.get("format", "csv")),
            local=_truthy(merged.get("local", False)),
            strict=_truthy(merged.get("strict", False)),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.format not in ("csv", "jsonl"):
        raise UsageError("--format must be csv or jsonl")
    if not 0 <= cfg.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    if cfg.command == "bound" and (cfg.xa is None or cfg.xb is None):
        raise UsageError("bound needs --xa and --xb")
    if cfg.command == "verify" and cfg.pairs < 1:
        raise UsageError("--pairs must be positive")
    if cfg.command == "minimize" and (not cfg.tol > 0 or cfg.budget < 0):
        raise UsageError("minimize needs --tol > 0 and --budget >= 0")
    return cfg


# -- problem setup --------------------------------------------------------

@dataclass
class Problem:
    model: FunctionModel
    box: BoxDomain
    kappa: LipschitzBox
    m: CurvatureBox
    certified: bool


def _expression_model(text: str, box: Optional[BoxDomain]) -> FunctionModel:
    try:
        e = Expression(text)
    except ExpressionError as exc:
        raise UsageError(f"malformed expression: {exc}") from None
    if box is None:
        raise UsageError("expression functions need --box")
    if e.max_var > box.dim:
        raise UsageError(f"expression uses x{e.max_var} but the box has {box.dim} axes")
    return FunctionModel(dim=box.dim, eval=e, domain=box.expanded(EXPR_DOMAIN_MARGIN), name=text)


def setup_problem(cfg: RunConfig) -> Problem:
    est = EstimationConfig(seed=cfg.seed % 2**32)
    kappa = m = None
    certified = False
    if cfg.function.startswith("expr:"):
        model = _expression_model(cfg.function[5:], cfg.box)
        box = cfg.box
    else:
        try:
            entry = get_entry(cfg.function)
        except CorpusError as exc:
            raise UsageError(str(exc)) from None
        box = cfg.box or entry.box
        if box.dim != entry.dim:
            raise UsageError(f"box has {box.dim} axes, {entry.name} needs {entry.dim}")
        model = entry.model_on(box) if not entry.model.domain.contains_box(box) else entry.model
        if entry.box.contains_box(box):
            kappa, m, certified = entry.kappa_oracle, entry.m_oracle, True
    if cfg.constants:
        fk, fm = read_constants(cfg.constants, box.dim)
        if fk is not None:
            kappa = fk
        if fm is not None:
            m = fm
        certified = fk is not None and fm is not None
    if kappa is None or m is None:
        log.warning("using sampled constants over the box (empirical, not certified)")
        certified = False
        if kappa is None:
            kappa = estimate_kappa(model, box, est)
        if m is None:
            m = estimate_M(model, box, est)
    if kappa.dim != box.dim or m.dim != box.dim:
        raise UsageError("constants dimension does not match the box")
    if cfg.strict:
        kappa = kappa.inflated(STRICT_INFLATION, strict=True)
        m = m.inflated(STRICT_INFLATION, strict=True)
    return Problem(model, box, kappa, m, certified)


# -- output ---------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x) + 0.0, ".17g")
    if isinstance(x, np.ndarray):
        return ";".join(format(float(v) + 0.0, ".17g") for v in x)
    return str(x)


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.floating, float)):
        return float(x) + 0.0
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [float(v) + 0.0 for v in x]
    return x


class ReportWriter:
    def __init__(self, stream, fmt_name: str, header: Optional[list]):
        self.stream = stream
        self.format = fmt_name
        self.header = header
        if fmt_name == "csv":
            self.csv = csv.writer(stream, lineterminator="\n")
            if header:
                self.csv.writerow(header)

    def row(self, values, header=None):
        if self.format == "csv":
            self.csv.writerow([fmt(v) for v in values])
        else:
            keys = header or self.header
            rec = {k: _jsonable(v) for k, v in zip(keys, values)}
            self.stream.write(json.dumps(rec, allow_nan=True) + "\n")


# -- commands -------------------------------------------------------------

def _check_in_box(box: BoxDomain, x, flag: str):
    if x.shape != (box.dim,):
        raise UsageError(f"{flag} has {x.size} coordinates, the box has {box.dim}")
    if not box.contains(x):
        raise UsageError(f"{flag} lies outside the box")


def cmd_bound(cfg: RunConfig, out: ReportWriter) -> int:
    prob = setup_problem(cfg)
    _check_in_box(prob.box, cfg.xa, "--xa")
    _check_in_box(prob.box, cfg.xb, "--xb")
    local = EstimationConfig(seed=cfg.seed % 2**32) if cfg.local else None
    batch = verify_segments(prob.model, cfg.xa[None], cfg.xb[None], prob.kappa, prob.m, local)
    slack = batch.slack
    for j, v in enumerate(batch.variants):
        out.row([cfg.function, v.name, v.locality, batch.delta_f[0], batch.values[0, j],
                 batch.valid[0, j], batch.strict_ok[0, j], slack[0, j]])
    return EXIT_OK if batch.violations == 0 else EXIT_VERIFY


def cmd_estimate(cfg: RunConfig, out: ReportWriter) -> int:
    prob_box = cfg.box
    if cfg.function.startswith("expr:"):
        model = _expression_model(cfg.function[5:], cfg.box)
    else:
        try:
            entry = get_entry(cfg.function)
        except CorpusError as exc:
            raise UsageError(str(exc)) from None
        prob_box = cfg.box or entry.box
        model = entry.model_on(prob_box)
    est = EstimationConfig(seed=cfg.seed % 2**32)
    if cfg.xa is not None or cfg.xb is not None:
        if cfg.xa is None or cfg.xb is None:
            raise UsageError("segment estimation needs both --xa and --xb")
        seg = Segment(cfg.xa, cfg.xb)
        try:
            k = estimate_segment_kappa(model, seg, est)
            m = estimate_segment_M(model, seg, est)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    else:
        k = estimate_kappa(model, prob_box, est)
        m = estimate_M(model, prob_box, est)
    n = k.dim
    for i in range(n):
        out.row(["kappa", i + 1, k.lo[i], k.hi[i]], header=["kind", "i", "lo", "hi"])
    for i in range(n):
        for j in range(n):
            out.row(["M", i + 1, j + 1, m.lo[i, j], m.hi[i, j]], header=["kind", "i", "j", "lo", "hi"])
    return EXIT_OK


def _anchor_gradient(model: FunctionModel, x):
    return model.gradient(x) if model.grad is not None else fd_gradient(model, x)


def cmd_enclose(cfg: RunConfig, out: ReportWriter) -> int:
    prob = setup_problem(cfg)
    anchor = prob.box.center if cfg.xa is None else cfg.xa
    _check_in_box(prob.box, np.asarray(anchor), "--xa")
    f0 = prob.model.f_scalar(anchor)
    lin = enclose_linear(f0, anchor, prob.box, prob.kappa)
    quad = enclose_quadratic(f0, _anchor_gradient(prob.model, anchor), anchor, prob.box, prob.m)
    for flavor, enc in (("linear", lin), ("quadratic", quad)):
        out.row([flavor, enc.lo, enc.hi, enc.anchor, enc.witness_lo])
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: ReportWriter) -> int:
    prob = setup_problem(cfg)
    min_step = STRICT_MIN_STEP if cfg.strict else 0.0
    A, B = sample_segments(prob.box, cfg.pairs, cfg.seed, min_step)
    local = EstimationConfig(seed=cfg.seed % 2**32) if cfg.local else None
    batch = verify_segments(prob.model, A, B, prob.kappa, prob.m, local)
    slack = batch.slack
    names = [(v.name, v.locality) for v in batch.variants]
    for r in range(A.shape[0]):
        for j, (name, loc) in enumerate(names):
            out.row([r, cfg.seed, cfg.function, name, loc, batch.delta_f[r], batch.values[r, j],
                     batch.valid[r, j], batch.strict_ok[r, j], slack[r, j]])
    if batch.violations:
        log.error("%d bound violations in %d segments", batch.violations, A.shape[0])
        return EXIT_VERIFY
    return EXIT_OK


def cmd_minimize(cfg: RunConfig, out: ReportWriter) -> int:
    prob = setup_problem(cfg)
    res = minimize(prob.model, prob.box, (prob.kappa, prob.m), tol=cfg.tol, budget=cfg.budget)
    for t in res.trace:
        out.row(["trace", t.iteration, t.queue_size, t.incumbent, t.certified_lower, t.gap, "", "", ""])
    remaining = res.trace[-1].queue_size if res.trace else 0
    out.row(["result", res.iterations, remaining, res.best_value, res.certified_lower, res.gap,
             res.best_point, res.converged, res.boxes_pruned])
    if not res.converged:
        log.warning("budget exhausted with gap %.3g > tol %.3g", res.gap, cfg.tol)
    return EXIT_OK


DISPATCH = {
    "bound": cmd_bound,
    "estimate": cmd_estimate,
    "enclose": cmd_enclose,
    "verify": cmd_verify,
    "minimize": cmd_minimize,
}


def run(cfg: RunConfig, stream=None) -> int:
    """Execute one command, writing the report to ``cfg.out`` or ``stream``."""
    buf = io.StringIO()
    header = HEADERS.get(cfg.command)
    code = DISPATCH[cfg.command](cfg, ReportWriter(buf, cfg.format, header))
    text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    verbose = "-v" in argv or "--verbose" in argv
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="lipbounds: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = build_config(argv)
        return run(cfg)
    except UsageError as exc:
        print(f"lipbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FloatingPointError, EstimationError) as exc:
        print(f"lipbounds: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"lipbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
