"""Monte Carlo strong-error experiments.

Every path draws one fine lattice of Wiener increments.  All schemes and
stepsizes, and the reference solution, are evaluated on that same lattice,
so errors at different ``h`` are coupled.  Paths are processed in chunks
(optionally across worker processes); per-path results are reassembled in
path order, so tables do not depend on the worker count.
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .fixtures import get_fixture, riccati_problem
from .integrals import critical_stepsize, q_for_word
from .integrators import (Scheme, compile_scheme, flow_maps, integrate_rk32,
                          riccati_extract, total_flow)
from .linalg import SCHEME_LABELS
from .wiener import generate_paths

__all__ = [
    "ExperimentSpec",
    "ReportRow",
    "ErrorReport",
    "parse_scheme",
    "run_experiment",
    "strong_error",
    "confidence_interval",
    "slope",
    "effort_model",
    "matched_effort_offset",
    "QuadCheck",
    "quadrature_check",
]

DEFAULT_LADDER = tuple(2.0 ** -k for k in range(4, 10))


def parse_scheme(label):
    """``"magnus-1"`` or with options ``"magnus-1:corrected"``, ``"neumann-05:mean-jii"``."""
    base, _, opts = label.partition(":")
    options = {}
    for o in filter(None, opts.split(",")):
        if o == "corrected":
            options["correction"] = True
        elif o == "mean-jii":
            options["exact_jii"] = False
        else:
            raise ValueError(f"unknown scheme option {o!r} in {label!r}")
    if base not in SCHEME_LABELS:
        raise ValueError(f"unknown scheme {base!r}; known: {', '.join(SCHEME_LABELS)}")
    return Scheme.from_label(base, **options)


@dataclass
class ExperimentSpec:
    """One error-vs-stepsize experiment.

    ``q_rule`` is ``"auto"`` (per-word rule for the scheme order, scaled by
    ``q_scale``) or a fixed subinterval count.  ``lattice`` is the number of
    fine increments per path over ``[0, T]``; the reference solution uses
    ``ref_scheme`` with stepsize ``min(h_list) / ref_factor``.
    """

    fixture: str
    schemes: tuple
    T: float = 1.0
    h_list: tuple = DEFAULT_LADDER
    q_rule: str = "auto"
    q_scale: float = 1.0
    n_paths: int = 2000
    n_batches: int = 20
    seed: int = 0
    lattice: int = 2 ** 18
    ref_factor: int = 64
    ref_scheme: str = "magnus-15"
    chunk: int = 25
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        self.schemes = tuple(self.schemes)
        self.h_list = tuple(float(h) for h in self.h_list)

    def steps(self, h):
        n = self.T / h
        if abs(n - round(n)) > 1e-9 * n:
            raise ValueError(f"h = {h} does not divide T = {self.T}")
        return int(round(n))

    @property
    def ref_steps(self):
        return self.steps(min(self.h_list)) * self.ref_factor

    def validate(self):
        if not self.schemes:
            raise ValueError("scheme list is empty")
        for s in self.schemes:
            if s.partition(":")[0] != "rk32-additive":
                parse_scheme(s)
            elif self.fixture != "riccati-9.1":
                raise ValueError("rk32-additive runs on the riccati-9.1 fixture only")
        get_fixture(self.fixture)
        if not self.h_list:
            raise ValueError("h ladder is empty")
        if self.T <= 0:
            raise ValueError("T must be positive")
        for h in self.h_list:
            if h <= 0:
                raise ValueError(f"non-positive stepsize {h}")
            if self.lattice % self.steps(h):
                raise ValueError(f"lattice {self.lattice} is not a multiple of N = T/h for h = {h}")
        if self.ref_factor < 1 or self.lattice % self.ref_steps:
            raise ValueError(f"reference needs {self.ref_steps} steps dividing the lattice "
                             f"of {self.lattice}")
        if self.n_paths < 1 or self.n_batches < 1 or self.n_paths % self.n_batches:
            raise ValueError("n_paths must be a positive multiple of n_batches")
        if self.q_rule != "auto":
            if int(self.q_rule) < 1:
                raise ValueError("fixed Q must be >= 1")
        if self.chunk < 1 or self.workers < 1:
            raise ValueError("chunk and workers must be >= 1")
        return self


@dataclass
class ReportRow:
    scheme: str
    h: float
    Q: int
    n_paths: int
    error: float
    ci90: float
    eval_flops: float
    quad_ops: float
    wall_ms: float

    @property
    def effort(self):
        return self.eval_flops + self.quad_ops


CSV_COLUMNS = ("scheme", "h", "Q", "n_paths", "error", "ci90", "eval_flops", "quad_ops",
               "wall_ms")


@dataclass
class ErrorReport:
    spec: ExperimentSpec
    rows: list
    excluded: dict = field(default_factory=dict)
    sq_errors: dict = field(default_factory=dict, repr=False)

    def select(self, scheme):
        return [r for r in self.rows if r.scheme == scheme]

    def table(self, include_wall=False):
        """Rows as tuples; wall time is left out unless asked for."""
        cols = CSV_COLUMNS if include_wall else CSV_COLUMNS[:-1]
        return [tuple(getattr(r, c) for c in cols) for r in self.rows]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow([r.scheme, repr(r.h), r.Q, r.n_paths, repr(r.error), repr(r.ci90),
                            int(r.eval_flops), int(r.quad_ops), f"{r.wall_ms:.1f}"])

    def summary(self):
        out = {"fixture": self.spec.fixture, "n_paths": self.spec.n_paths,
               "seed": self.spec.seed, "excluded_paths": self.excluded, "schemes": {}}
        model = effort_model(self)
        for s in dict.fromkeys(r.scheme for r in self.rows):
            rows = self.select(s)
            entry = {"regimes": model[s]["regimes"], "h_crossover": model[s]["h_crossover"],
                     "h_cr_predicted": model[s]["h_cr_predicted"]}
            if len(rows) >= 2 and all(r.error > 0 for r in rows):
                entry["slope_error_vs_h"] = slope(rows, "h", "error")
                entry["slope_error_vs_effort"] = slope(rows, "effort", "error")
            out["schemes"][s] = entry
        return out

    def write(self, directory, stem):
        import os

        os.makedirs(directory, exist_ok=True)
        self.to_csv(os.path.join(directory, f"{stem}.csv"))
        with open(os.path.join(directory, f"{stem}.json"), "w") as fh:
            json.dump(self.summary(), fh, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(type(o))


def confidence_interval(batch_means, level=0.90):
    """Half-width of a Student-t interval for ``sqrt(mean)``.

    ``batch_means`` are batch averages of squared errors.  The interval on
    the mean square is mapped through the square root and half its width
    is returned.
    """
    b = np.asarray(batch_means, dtype=float)
    if b.size < 10:
        raise ValueError(f"need at least 10 batches, got {b.size}")
    m = b.mean()
    se = b.std(ddof=1) / math.sqrt(b.size)
    hw = stats.t.ppf(0.5 + level / 2, b.size - 1) * se
    if hw == 0:
        return 0.0
    return 0.5 * (math.sqrt(m + hw) - math.sqrt(max(m - hw, 0.0)))


def strong_error(sq_errors, n_batches, level=0.90):
    """``(error, half_width)`` from per-path squared terminal deviations."""
    sq = np.asarray(sq_errors, dtype=float)
    if sq.size % n_batches:
        raise ValueError("path count must be a multiple of n_batches")
    means = sq.reshape(n_batches, -1).mean(axis=1)
    return math.sqrt(means.mean()), confidence_interval(means, level)


def slope(rows, x_field, y_field):
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.array([getattr(r, x_field) if not isinstance(r, dict) else r[x_field] for r in rows],
                 dtype=float)
    y = np.array([getattr(r, y_field) if not isinstance(r, dict) else r[y_field] for r in rows],
                 dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("slope needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _order_of(label):
    s = parse_scheme(label) if not label.startswith("rk32") else Scheme("rk32-additive", "3/2")
    return s.order


def _rule_q(label, system, h, spec):
    """Subinterval count the Q rule asks for, before the lattice cap."""
    if spec.q_rule != "auto":
        return int(spec.q_rule)
    if label.startswith("rk32"):
        return q_for_word((1, 0), h, Fraction(3, 2), spec.q_scale)
    compiled = compile_scheme(parse_scheme(label), system)
    words = [w for w in compiled.required_words if len(set(w)) > 1]
    return max([q_for_word(w, h, compiled.scheme.order, spec.q_scale) for w in words] or [1])


def effort_model(report):
    """Per scheme: regime of each row and the stepsize where the tallies cross.

    A row is evaluation-dominated when its evaluation flops are at least its
    quadrature operations.  ``capped`` marks rows whose Q was limited by the
    lattice resolution, so that their effort falls short of the Q rule.  The
    crossover is interpolated in ``log h``; the prediction uses
    :func:`critical_stepsize`.
    """
    out = {}
    fixture_sys, _ = get_fixture(report.spec.fixture)
    for s in dict.fromkeys(r.scheme for r in report.rows):
        rows = sorted(report.select(s), key=lambda r: -r.h)
        regimes = ["evaluation" if r.eval_flops >= r.quad_ops else "quadrature" for r in rows]
        cross = None
        for a, b in zip(rows, rows[1:]):
            fa = math.log(a.eval_flops) - math.log(max(a.quad_ops, 1e-300))
            fb = math.log(b.eval_flops) - math.log(max(b.quad_ops, 1e-300))
            if fa >= 0 > fb:
                t = fa / (fa - fb)
                cross = math.exp(math.log(a.h) + t * (math.log(b.h) - math.log(a.h)))
                break
        base = s.partition(":")[0]
        pred = None
        M = _order_of(s)
        if M > Fraction(1, 2) and base != "rk32-additive":
            pred = critical_stepsize(M, fixture_sys.d, fixture_sys.p, report.spec.T, base)
        capped = [r.Q < _rule_q(s, fixture_sys, r.h, report.spec) for r in rows]
        out[s] = {"h": [r.h for r in rows], "regimes": regimes, "capped": capped,
                  "h_crossover": cross, "h_cr_predicted": pred}
    return out


def matched_effort_offset(report, high, low, base=10.0):
    """``log E_high - log E_low`` at equal total effort.

    Uses the rows of ``high`` in the quadrature-dominated regime and the
    least-squares log-log line of ``low`` (error against effort),
    evaluated at the same efforts.
    """
    lo = report.select(low)
    hi = [r for r in report.select(high) if r.quad_ops > r.eval_flops]
    if len(lo) < 2 or not hi:
        raise ValueError("not enough rows for a matched-effort comparison")
    lx = np.log([r.effort for r in lo])
    ly = np.log([r.error for r in lo])
    k, c = np.polyfit(lx, ly, 1)
    diffs = [math.log(r.error) - (c + k * math.log(r.effort)) for r in hi]
    return float(np.mean(diffs)) / math.log(base)


# -- execution ----------------------------------------------------------------

def _q_fixed(spec):
    return None if spec.q_rule == "auto" else int(spec.q_rule)


def _terminal(compiled, grid, y0, q_scale=1.0, q_fixed=None):
    fmap, effort, table = flow_maps(compiled, grid, q_scale=q_scale, q_fixed=q_fixed)
    flow = total_flow(fmap)
    y = np.einsum("...ij,j->...i", flow, y0) if y0.ndim == 1 else flow @ y0
    qmax = max([q for w, q in table.q.items() if table.provenance[w] != "exact"] or [1])
    return y, effort, qmax


def _observable(spec, y):
    """Quantity whose error is measured: the state, or u = U V^{-1} for Riccati."""
    if spec.fixture != "riccati-9.1":
        return y, np.ones(y.shape[0], dtype=bool)
    p = y.shape[-1]
    U, V = y[..., :p, :], y[..., p:, :]
    ok = np.linalg.cond(V) <= 1e12
    u = np.full(U.shape, np.nan)
    if ok.any():
        u[ok] = riccati_extract(y[ok])
    return u, ok


def _run_chunk(args):
    spec, paths = args
    system, y0 = get_fixture(spec.fixture)
    grid = generate_paths(system.d, spec.T, 1, spec.lattice, spec.seed, paths)
    ref_c = compile_scheme(parse_scheme(spec.ref_scheme), system)
    yr, _, _ = _terminal(ref_c, grid.with_steps(spec.ref_steps), y0)
    ur, ok_ref = _observable(spec, yr)
    result = {"ok": ok_ref.copy(), "sq": {}, "eff": {}, "wall": {}}
    for label in spec.schemes:
        compiled = None if label.startswith("rk32") else compile_scheme(parse_scheme(label), system)
        for h in spec.h_list:
            g = grid.with_steps(spec.steps(h))
            t0 = time.perf_counter()
            if compiled is None:
                u, effort, qmax = integrate_rk32(riccati_problem(), g, q_scale=spec.q_scale,
                                                 q_fixed=_q_fixed(spec), return_q=True)
                ok = np.all(np.isfinite(u), axis=(-2, -1))
            else:
                y, effort, qmax = _terminal(compiled, g, y0, spec.q_scale, _q_fixed(spec))
                u, ok = _observable(spec, y)
            wall = (time.perf_counter() - t0) * 1e3
            diff = u - ur
            sq = np.where(ok & ok_ref, np.sum(diff.reshape(diff.shape[0], -1) ** 2, axis=1), np.nan)
            result["ok"] &= ok
            result["sq"][(label, h)] = sq
            result["eff"][(label, h)] = (effort.breakdown["eval"], effort.breakdown["quad"], qmax)
            result["wall"][(label, h)] = wall / len(paths)
    return result


def run_experiment(spec: ExperimentSpec, progress=None) -> ErrorReport:
    """Run every scheme at every stepsize on ``spec.n_paths`` coupled paths."""
    spec.validate()
    chunks = [tuple(range(s, min(s + spec.chunk, spec.n_paths)))
              for s in range(0, spec.n_paths, spec.chunk)]
    jobs = [(spec, c) for c in chunks]
    if spec.workers > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(spec.workers) as pool:
            results = pool.map(_run_chunk, jobs, chunksize=1)
    else:
        results = []
        for k, job in enumerate(jobs):
            results.append(_run_chunk(job))
            if progress:
                progress(k + 1, len(jobs))
    ok = np.concatenate([r["ok"] for r in results])
    n_bad = int((~ok).sum())
    rows, sq_all = [], {}
    for label in spec.schemes:
        for h in spec.h_list:
            sq = np.concatenate([r["sq"][(label, h)] for r in results])
            ev, qo, qmax = results[0]["eff"][(label, h)]
            wall = float(np.mean([r["wall"][(label, h)] for r in results]))
            if n_bad:
                # failed paths are dropped; keep whole batches
                good = sq[ok]
                keep = (good.size // spec.n_batches) * spec.n_batches
                sq_use = good[:keep]
            else:
                sq_use = sq
            err, ci = strong_error(sq_use, spec.n_batches)
            rows.append(ReportRow(label, h, int(qmax), int(sq_use.size), err, ci,
                                  float(ev), float(qo), wall))
            sq_all[(label, h)] = sq
    return ErrorReport(spec, rows, {"reference_or_scheme_failures": n_bad}, sq_all)


# -- quadrature rate check ----------------------------------------------------

@dataclass
class QuadCheck:
    """Measured L2 error of ``E[J_word | F_Q]`` against a fine-lattice value."""

    word: tuple
    h: float
    q_list: tuple
    error: np.ndarray
    stderr: np.ndarray
    predicted: tuple | None

    @property
    def slope(self):
        if np.any(self.error <= 0):
            return 0.0
        return float(np.polyfit(np.log(self.q_list), np.log(self.error), 1)[0])


def quadrature_check(word, h, q_list, n_paths, seed=0, fine_factor=64, batch=1000):
    """L2 error of the conditioned integral for each ``Q`` in ``q_list``.

    The comparison value is the iterated integral of the piecewise linear
    path on ``max(q_list) * fine_factor`` subintervals of one step.
    """
    from .integrals import conditional_expectation, linear_path_integral, quadrature_rate
    from .shuffle import as_word, is_constant

    w = as_word(word)
    q_list = tuple(int(q) for q in q_list)
    d = max(max(w), 1)
    fine = max(q_list) * fine_factor
    sq = {q: [] for q in q_list}
    for start in range(0, n_paths, batch):
        g = generate_paths(d, h, 1, fine, seed, range(start, min(start + batch, n_paths)))
        x = np.moveaxis(g.increments, 1, 0)  # (d, paths, fine)
        ref = linear_path_integral(w, x, h / fine)
        for q in q_list:
            xq = x.reshape(x.shape[:-1] + (q, fine // q)).sum(-1)
            est = conditional_expectation(w, xq, h / q)
            sq[q].append((ref - est) ** 2)
    err, se = [], []
    for q in q_list:
        v = np.concatenate(sq[q])
        m = v.mean()
        err.append(math.sqrt(m))
        se.append(v.std(ddof=1) / math.sqrt(v.size) / (2 * math.sqrt(m)) if m > 0 else 0.0)
    pred = None if is_constant(w) else quadrature_rate(w)
    return QuadCheck(w, h, q_list, np.array(err), np.array(se), pred)
