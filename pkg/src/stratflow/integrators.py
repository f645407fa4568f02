"""Neumann and Magnus flow-map integrators for linear Stratonovich SDEs

    y_t = y_0 + sum_{i=0}^d int_0^t a_i y_s dW^i_s,   W^0_t = t,

plus the Riccati linearization front end and an additive-noise Runge-Kutta
comparison scheme.

A scheme is compiled against a system into a deterministic block (a
polynomial in h, holding drift terms and terms replaced by their
expectations) and a list of path terms ``(coefficient, matrix)`` whose
coefficients are polynomials in iterated integrals.  A step evaluates
``I + X`` (Neumann) or ``exp(X)`` (Magnus) with ``X`` the assembled sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations, product
from math import factorial

import numpy as np

from .integrals import IntegralTable, expected_signature, weight
from .linalg import FlopTally, SCHEME_LABELS, commutator, expm
from .shuffle import WordPoly, format_word
from .wiener import WienerGrid

__all__ = [
    "LinearSDESystem",
    "Scheme",
    "CompiledScheme",
    "FlowStep",
    "compile_scheme",
    "build_table",
    "step",
    "flow_maps",
    "integrate",
    "total_flow",
    "term_count",
    "RiccatiProblem",
    "riccati_linearize",
    "riccati_extract",
    "riccati_field",
    "rk32_step",
    "integrate_rk32",
    "local_error_gap",
    "GapEstimate",
]

_COMMUTE_TOL = 1e-13


class LinearSDESystem:
    """Coefficient matrices ``a[0]`` (drift) to ``a[d]`` of a linear SDE."""

    def __init__(self, a):
        mats = [np.array(m, dtype=float) for m in a]
        if not mats:
            raise ValueError("need at least the drift matrix a_0")
        p = mats[0].shape[0]
        for k, m in enumerate(mats):
            if m.shape != (p, p):
                raise ValueError(f"a_{k} has shape {m.shape}, expected ({p}, {p})")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"a_{k} has non-finite entries")
            m.setflags(write=False)
        self.a = tuple(mats)
        self.p = p
        self.d = len(mats) - 1
        self._products = {}

    @property
    def commuting_diffusion(self) -> bool:
        scale = max(1.0, max(np.abs(m).max() for m in self.a))
        for i, j in combinations(range(1, self.d + 1), 2):
            if np.linalg.norm(commutator(self.a[i], self.a[j])) > _COMMUTE_TOL * scale ** 2:
                return False
        return True

    def product(self, mword):
        """Cached matrix product ``a[m_1] a[m_2] ...`` for a matrix word."""
        mword = tuple(mword)
        if mword not in self._products:
            if not mword:
                val = np.eye(self.p)
            else:
                val = reduce(np.matmul, (self.a[k] for k in mword))
            val.setflags(write=False)
            self._products[mword] = val
        return self._products[mword]

    def comm(self, *idx):
        """Nested commutator ``[a_i, [a_j, ... a_k]]``."""
        out = self.a[idx[-1]]
        for k in reversed(idx[:-1]):
            out = commutator(self.a[k], out)
        return out

    def __repr__(self):
        return f"LinearSDESystem(p={self.p}, d={self.d})"


@dataclass(frozen=True)
class Scheme:
    """An integrator family and global order.

    ``family`` is ``"neumann"``, ``"magnus"``, ``"magnus-ua"`` or
    ``"rk32-additive"``; ``order`` is 1/2, 1 or 3/2.  ``correction`` adds the
    mean of the leading local remainder to the order-1 Magnus exponent;
    ``exact_jii`` keeps ``J_ii = J_i^2/2`` exactly in the order-1/2 Neumann
    scheme (otherwise it is replaced by its mean ``h/2``).
    """

    family: str
    order: Fraction
    correction: bool = False
    exact_jii: bool = True

    def __post_init__(self):
        object.__setattr__(self, "order", Fraction(self.order))
        if self.label not in SCHEME_LABELS:
            raise ValueError(f"unsupported scheme {self.family} of order {self.order}")
        if self.correction and not (self.family == "magnus" and self.order == 1):
            raise ValueError("the remainder-mean correction applies to magnus-1 only")

    @property
    def label(self) -> str:
        if self.family == "rk32-additive":
            return "rk32-additive"
        o = {Fraction(1, 2): "05", Fraction(1): "1", Fraction(3, 2): "15"}.get(self.order, "?")
        return f"{self.family}-{o}"

    @classmethod
    def from_label(cls, label, **options):
        label = label.strip()
        if label == "rk32-additive":
            return cls("rk32-additive", Fraction(3, 2))
        family, _, o = label.rpartition("-")
        order = {"05": Fraction(1, 2), "1": Fraction(1), "15": Fraction(3, 2)}.get(o)
        if order is None or label not in SCHEME_LABELS:
            raise ValueError(f"unknown scheme {label!r}; known: {', '.join(SCHEME_LABELS)}")
        return cls(family, order, **options)

    @property
    def is_magnus(self) -> bool:
        return self.family.startswith("magnus")


@dataclass
class CompiledScheme:
    scheme: Scheme
    system: LinearSDESystem
    det_terms: list        # (power of h, coefficient, matrix)
    path_terms: list       # (WordPoly, matrix)
    expectation_words: list = field(default_factory=list)

    @property
    def required_words(self):
        return sorted({w for poly, _ in self.path_terms for w in poly.words()},
                      key=lambda w: (len(w), w))

    @property
    def n_terms(self) -> int:
        return len(self.path_terms) + (1 if self.det_terms else 0)

    @property
    def c_m(self) -> int:
        """Scalar-matrix multiplications plus matrix additions per step."""
        return 2 * self.n_terms - 1

    def eval_flops(self) -> int:
        p = self.system.p
        return self.c_m * p ** 2 + (6 * p ** 3 if self.scheme.is_magnus else 0)

    def det_block(self, h):
        out = np.zeros((self.system.p, self.system.p))
        for k, c, m in self.det_terms:
            out += c * h ** k * m
        return out

    def describe(self):
        lines = [f"{self.scheme.label}: c_M = {self.c_m}"]
        for k, c, _ in self.det_terms:
            lines.append(f"  deterministic  {c:+.6g} h^{k}")
        for poly, _ in self.path_terms:
            lines.append(f"  path           {poly.render()}")
        return "\n".join(lines)


def _nonzero(m):
    return np.any(m != 0)


def _neumann_terms(scheme, sys):
    M2 = int(2 * scheme.order)
    det, path, expect = [], [], []
    max_len = M2 + 1
    for ell in range(1, max_len + 1):
        for w in product(range(sys.d + 1), repeat=ell):
            wt = weight(w)
            if wt > M2 + 1:
                continue
            mat = sys.product(tuple(reversed(w)))
            if not _nonzero(mat):
                continue
            if all(c == 0 for c in w):
                if wt <= M2 + 1:
                    det.append((ell, 1.0 / factorial(ell), mat))
                continue
            keep_exact = (wt <= M2) or (
                scheme.order == Fraction(1, 2) and scheme.exact_jii
                and len(w) == 2 and w[0] == w[1])
            if keep_exact:
                path.append((WordPoly.word(w), mat))
                continue
            c, k = expected_signature(w)
            if c:
                det.append((k, float(c), mat))
                expect.append(w)
    return det, path, expect


def _magnus_terms(scheme, sys):
    d, a = sys.d, sys.a
    M = scheme.order
    det, path, expect = [], [], []
    half = Fraction(1, 2)
    J = WordPoly.word
    if _nonzero(a[0]):
        det.append((1, 1.0, a[0]))
    for i in range(1, d + 1):
        if _nonzero(a[i]):
            path.append((J((i,)), a[i]))
    double0 = sum((sys.comm(i, i, 0) for i in range(1, d + 1)), np.zeros_like(a[0]))
    if scheme.family == "magnus-ua":
        if not sys.commuting_diffusion:
            raise ValueError(f"{scheme.label} requires commuting diffusion matrices")
        if _nonzero(double0):
            det.append((2, 1.0 / 12, double0))
        if M >= Fraction(3, 2):
            for i in range(1, d + 1):
                m = sys.comm(0, i)
                if _nonzero(m):
                    path.append((J((i, 0), half) - J((0, i), half), m))
        return det, path, expect
    if M >= 1:
        for i, j in combinations(range(1, d + 1), 2):
            m = sys.comm(i, j)
            if _nonzero(m):
                path.append((J((j, i), half) - J((i, j), half), m))
    if scheme.correction:
        corr = double0.copy()
        for i, j in combinations(range(1, d + 1), 2):
            corr += a[i] @ sys.comm(j, j, i) + a[j] @ sys.comm(i, i, j)
        if _nonzero(corr):
            det.append((2, 1.0 / 12, corr))
    if M >= Fraction(3, 2):
        for i in range(1, d + 1):
            m = sys.comm(0, i)
            if _nonzero(m):
                path.append((J((i, 0), half) - J((0, i), half), m))
        for i, j in product(range(1, d + 1), repeat=2):
            if i == j:
                continue
            m = sys.comm(i, i, j)
            if _nonzero(m):
                poly = (J((i, i, j)) - (J((i,)) * J((i, j))).scale(half)
                        + (J((i,)) * J((i,)) * J((j,))).scale(Fraction(1, 12)))
                path.append((poly, m))
        for i, j, k in combinations(range(1, d + 1), 3):
            third = Fraction(2, 3)
            jjj = J((i,)) * J((j,)) * J((k,))
            m1 = sys.comm(i, j, k)
            if _nonzero(m1):
                poly = (J((i, j, k)) + (J((j,)) * J((k, i))).scale(half)
                        + (J((k,)) * J((i, j))).scale(half) - jjj.scale(third))
                path.append((poly, m1))
            m2 = sys.comm(j, i, k)
            if _nonzero(m2):
                poly = (J((j, i, k)) + (J((i,)) * J((k, j))).scale(half)
                        + (J((k,)) * J((j, i))).scale(half) - jjj.scale(third))
                path.append((poly, m2))
        # (J_ii0 - J_i J_i0 / 2 + J_i^2 h / 12) has mean h^2/12
        if _nonzero(double0):
            det.append((2, 1.0 / 12, double0))
            expect.extend((i, i, 0) for i in range(1, d + 1))
    return det, path, expect


def compile_scheme(scheme, system: LinearSDESystem) -> CompiledScheme:
    """Assemble the deterministic block and path terms of ``scheme``.

    Path-independent commutators and products are computed once here.
    Terms whose matrix vanishes identically are dropped.
    """
    if isinstance(scheme, str):
        scheme = Scheme.from_label(scheme)
    if scheme.family == "rk32-additive":
        raise ValueError("rk32-additive acts on the Riccati equation; use integrate_rk32")
    if scheme.family == "neumann":
        det, path, expect = _neumann_terms(scheme, system)
    else:
        det, path, expect = _magnus_terms(scheme, system)
    return CompiledScheme(scheme, system, det, path, expect)


def term_count(scheme_label, d) -> int:
    """Number of terms (path terms plus the deterministic block) for a generic system."""
    rng = np.random.default_rng(12345)
    sys = LinearSDESystem(rng.standard_normal((d + 1, 3, 3)))
    if scheme_label.startswith("magnus-ua"):
        # commuting diffusions: simultaneously diagonal, drift generic
        diag = [np.diag(rng.standard_normal(3)) for _ in range(d)]
        sys = LinearSDESystem([rng.standard_normal((3, 3))] + diag)
    return compile_scheme(Scheme.from_label(scheme_label), sys).n_terms


@dataclass
class FlowStep:
    """One-step flow maps (stacked over leading axes) and their effort."""

    map: np.ndarray
    effort: FlopTally
    provenance: dict


def build_table(compiled: CompiledScheme, grid: WienerGrid, *, q_scale=1.0, q_fixed=None):
    """Integral table for ``compiled`` over every step of ``grid``.

    The grid's ``Q`` lattice points per step cap the conditioning
    resolution of each word.
    """
    return IntegralTable.build(compiled.required_words, grid, grid.T, grid.N,
                               compiled.scheme.order, q_scale=q_scale, q_fixed=q_fixed)


def _poly_value(poly: WordPoly, table: IntegralTable):
    total = 0.0
    for mono, c in poly.terms.items():
        v = float(c)
        for w in mono:
            v = v * table[w]
        total = total + v
    return total


def step(compiled, table: IntegralTable, h=None) -> FlowStep:
    """Flow maps for every step held in ``table``.

    Raises ``KeyError`` naming the first required word missing from the table.
    """
    if not isinstance(compiled, CompiledScheme):
        raise TypeError("step expects a CompiledScheme (see compile_scheme)")
    h = table.h if h is None else h
    for w in compiled.required_words:
        if w not in table:
            raise KeyError(f"integral table is missing word {format_word(w)} "
                           f"required by {compiled.scheme.label}")
    x = compiled.det_block(h)
    for poly, mat in compiled.path_terms:
        coef = np.asarray(_poly_value(poly, table))
        x = x + coef[..., None, None] * mat
    x = np.asarray(x)
    n_maps = int(np.prod(x.shape[:-2])) if x.ndim > 2 else 1
    tally = FlopTally()
    p = compiled.system.p
    tally.add("assemble", n_maps * compiled.c_m * p ** 2)
    if compiled.scheme.is_magnus:
        fmap = expm(x)
        tally.add("expm_nominal", n_maps * 6 * p ** 3)
    else:
        fmap = np.eye(p) + x
    if not np.all(np.isfinite(fmap)):
        raise FloatingPointError(f"{compiled.scheme.label} produced non-finite flow maps")
    return FlowStep(fmap, tally, dict(table.provenance))


def flow_maps(compiled, grid: WienerGrid, *, q_scale=1.0, q_fixed=None):
    """Per-step flow maps ``(..., N, p, p)`` and the effort tally.

    The tally holds per-path totals: ``eval`` (the ``c_M p^2 + c_E`` model
    per step) and ``quad`` (quadrature operations).
    """
    table = build_table(compiled, grid, q_scale=q_scale, q_fixed=q_fixed)
    fs = step(compiled, table)
    n_paths = int(np.prod(grid.increments.shape[:-2])) if grid.increments.ndim > 2 else 1
    effort = FlopTally()
    effort.add("eval", grid.N * compiled.eval_flops())
    effort.add("quad", table.tally.count // max(n_paths, 1))
    fmap = fs.map
    if fmap.ndim == 2:
        fmap = np.broadcast_to(fmap, (grid.N, compiled.system.p, compiled.system.p))
    elif grid.increments.ndim > 2 and fmap.ndim == 3:
        fmap = np.broadcast_to(fmap, grid.increments.shape[:-2] + fmap.shape)
    return fmap, effort, table


def total_flow(fmap):
    """Ordered product ``F_{N-1} ... F_1 F_0`` by pairwise reduction over steps."""
    f = np.asarray(fmap)
    while f.shape[-3] > 1:
        n = f.shape[-3]
        head = f[..., 1:n - n % 2:2, :, :] @ f[..., 0:n - n % 2:2, :, :]
        f = np.concatenate([head, f[..., n - 1:, :, :]], axis=-3) if n % 2 else head
    return f[..., 0, :, :]


def _compose(fmap, y0, return_path):
    y = np.asarray(y0, dtype=float)
    if not return_path:
        flow = total_flow(fmap)
        if y.ndim == 1:
            return np.einsum("...ij,j->...i", flow, y)
        return flow @ y
    vec = y.ndim == 1
    if vec:
        y = np.broadcast_to(y, fmap.shape[:-3] + y.shape)
    states = [y]
    N = fmap.shape[-3]
    for n in range(N):
        f = fmap[..., n, :, :]
        y = np.einsum("...ij,...j->...i", f, y) if vec else f @ y
        states.append(y)
    if return_path:
        return np.stack(states, axis=-2 if vec else -3)
    return y


def integrate(scheme, system: LinearSDESystem, grid: WienerGrid, y0, *,
              q_scale=1.0, q_fixed=None, return_path=True):
    """Compose one-step flows along ``grid``.

    ``y0`` is a state vector ``(p,)`` or a matrix ``(p, k)``.  Returns
    ``(states, effort)`` with ``states`` the trajectory at ``t_0..t_N`` (or
    only the final state if ``return_path`` is false) and ``effort`` the
    per-path flop tally.
    """
    if grid.d != system.d:
        raise ValueError(f"grid has d={grid.d} Wiener processes, system has d={system.d}")
    y0 = np.asarray(y0, dtype=float)
    if y0.shape[0] != system.p:
        raise ValueError(f"initial state has leading dimension {y0.shape[0]}, system p={system.p}")
    compiled = scheme if isinstance(scheme, CompiledScheme) else compile_scheme(
        Scheme.from_label(scheme) if isinstance(scheme, str) else scheme, system)
    fmap, effort, _ = flow_maps(compiled, grid, q_scale=q_scale, q_fixed=q_fixed)
    return _compose(fmap, y0, return_path), effort


# -- Riccati front end -----------------------------------------------------

@dataclass(frozen=True)
class RiccatiProblem:
    """``du = sum_i (u A_i u + B_i u + u C_i + D_i) dW^i`` with blocks per index."""

    A: tuple
    B: tuple
    C: tuple
    D: tuple
    u0: np.ndarray

    @property
    def p(self):
        return self.u0.shape[0]

    @property
    def d(self):
        return len(self.A) - 1

    @property
    def additive(self) -> bool:
        return all(not (_nonzero(self.A[i]) or _nonzero(self.B[i]) or _nonzero(self.C[i]))
                   for i in range(1, self.d + 1))


def riccati_linearize(A, B, C, D) -> LinearSDESystem:
    """Block system ``a_i = [[B_i, D_i], [-A_i, -C_i]]`` of size 2p."""
    blocks = []
    for Ai, Bi, Ci, Di in zip(A, B, C, D):
        Ai, Bi, Ci, Di = (np.asarray(m, dtype=float) for m in (Ai, Bi, Ci, Di))
        p = Ai.shape[0]
        if not all(m.shape == (p, p) for m in (Ai, Bi, Ci, Di)):
            raise ValueError("all Riccati blocks must be p x p")
        blocks.append(np.block([[Bi, Di], [-Ai, -Ci]]))
    if len({len(A), len(B), len(C), len(D)}) != 1:
        raise ValueError("A, B, C, D need the same number of indices")
    return LinearSDESystem(blocks)


def riccati_extract(y, cond_max=1e12, time_index=None):
    """``u = U V^{-1}`` from stacked states ``y = [U; V]`` of shape ``(..., 2p, p)``."""
    y = np.asarray(y, dtype=float)
    p = y.shape[-1]
    U, V = y[..., :p, :], y[..., p:, :]
    cond = np.linalg.cond(V)
    bad = ~(cond <= cond_max)
    if np.any(bad):
        where = "" if time_index is None else f" at time index {time_index}"
        raise np.linalg.LinAlgError(
            f"V is singular or ill-conditioned{where} (cond {np.max(cond):.3e})")
    return np.swapaxes(np.linalg.solve(np.swapaxes(V, -1, -2), np.swapaxes(U, -1, -2)), -1, -2)


def riccati_field(S, A0, B0, C0, D0):
    """Drift ``f(S) = S A0 S + B0 S + S C0 + D0``."""
    return S @ A0 @ S + B0 @ S + S @ C0 + D0


def rk32_step(f, D, S, h, J, J0):
    """One additive-noise Runge-Kutta step of strong order 3/2.

    ``D`` lists the noise matrices ``D_1..D_d``; ``J[j]`` and ``J0[j]`` are
    the step values of ``J_j`` and ``J_{j0}`` (scalars or arrays matching
    the leading axes of ``S``).
    """
    S = np.asarray(S, dtype=float)
    fS = f(S)
    sq = np.sqrt(h)
    base = S + 0.5 * h * fS
    out = S + fS * h
    avg = -2 * len(D) * fS
    for Dj, Jj, J0j in zip(D, J, J0):
        Dj = np.asarray(Dj, dtype=float)
        Jj = np.asarray(Jj)[..., None, None]
        J0j = np.asarray(J0j)[..., None, None]
        fp = f(base + sq * Dj)
        fm = f(base - sq * Dj)
        out = out + Dj * Jj + (fp - fm) * J0j / (2 * sq)
        avg = avg + fp + fm
    return out + 0.25 * h * avg


def integrate_rk32(problem: RiccatiProblem, grid: WienerGrid, *, q_scale=1.0, q_fixed=None,
                   return_q=False):
    """Runge-Kutta 3/2 path of the Riccati equation itself.

    Returns ``(u_T, effort)``; ``J_{j0}`` is conditioned on the lattice with
    the order-3/2 subinterval rule.  Diverging paths come back non-finite.
    """
    if not problem.additive:
        raise ValueError("rk32-additive needs additive noise (A_i = B_i = C_i = 0 for i >= 1)")
    d, h = problem.d, grid.h
    words = [(j,) for j in range(1, d + 1)] + [(j, 0) for j in range(1, d + 1)]
    table = IntegralTable.build(words, grid, grid.T, grid.N, Fraction(3, 2),
                                q_scale=q_scale, q_fixed=q_fixed)
    A0, B0, C0, D0 = (np.asarray(m[0], dtype=float) for m in
                      (problem.A, problem.B, problem.C, problem.D))
    D = [np.asarray(problem.D[j], dtype=float) for j in range(1, d + 1)]
    f = lambda S: riccati_field(S, A0, B0, C0, D0)
    lead = grid.increments.shape[:-2]
    S = np.broadcast_to(problem.u0, lead + problem.u0.shape).astype(float)
    for n in range(grid.N):
        J = [table[(j,)][..., n] for j in range(1, d + 1)]
        J0 = [table[(j, 0)][..., n] for j in range(1, d + 1)]
        with np.errstate(over="ignore", invalid="ignore"):
            S = rk32_step(f, D, S, h, J, J0)
    p = problem.p
    n_paths = int(np.prod(lead)) if lead else 1
    effort = FlopTally()
    effort.add("eval", grid.N * ((2 * d + 1) * (4 * p ** 3 + 6 * p ** 2) + 12 * d * p ** 2))
    effort.add("quad", table.tally.count // n_paths)
    if return_q:
        return S, effort, max(table.q.values())
    return S, effort


# -- local error comparison ---------------------------------------------------

@dataclass
class GapEstimate:
    """Monte Carlo estimate of ``E[R_neu^T R_neu] - E[R_mag^T R_mag]``."""

    gap: np.ndarray
    stderr: np.ndarray
    n_samples: int
    samples: np.ndarray = field(repr=False, default=None)

    def symmetrized(self):
        return 0.5 * (self.gap + self.gap.T)

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.symmetrized()).min())

    def eigen_stderr(self):
        """Standard error of the smallest eigenvalue, projected on its eigenvector."""
        _, vecs = np.linalg.eigh(self.symmetrized())
        v = vecs[:, 0]
        sym = 0.5 * (self.samples + np.swapaxes(self.samples, -1, -2))
        vals = np.einsum("i,nij,j->n", v, sym, v)
        return float(vals.std(ddof=1) / np.sqrt(vals.size))


def local_error_gap(system, h, Q, n_samples, M, *, seed=0, ref_factor=64,
                    magnus="magnus-ua", neumann="neumann", batch=2000):
    """One-step mean-square remainder gap between Neumann and Magnus schemes.

    Both schemes start from the identity with integrals conditioned on ``Q``
    subintervals; the reference flow is an order-3/2 Magnus composition on
    ``Q * ref_factor`` fine steps of the same path.  Returns a
    :class:`GapEstimate` whose ``gap`` is positive semi-definite when the
    Magnus scheme is the more accurate one.
    """
    from .wiener import generate_paths

    M = Fraction(M)
    d = system.d
    mag = compile_scheme(Scheme(magnus, M), system)
    neu = compile_scheme(Scheme(neumann, M), system)
    ref = compile_scheme(Scheme("magnus", Fraction(3, 2)), system)
    fine = Q * ref_factor
    p = system.p
    samples = []
    for start in range(0, n_samples, batch):
        paths = range(start, min(start + batch, n_samples))
        g = generate_paths(d, h, 1, fine, seed, paths)
        coarse = WienerGrid(d, h, 1, fine, seed, g.increments, g.paths)
        fref = flow_maps(ref, WienerGrid(d, h, fine, 1, seed, g.increments, g.paths))[0]
        exact = _compose(fref, np.eye(p), False)
        rows = []
        for cs in (neu, mag):
            fm = flow_maps(cs, coarse, q_fixed=Q)[0][..., 0, :, :]
            r = fm - exact
            rows.append(np.swapaxes(r, -1, -2) @ r)
        samples.append(rows[0] - rows[1])
    s = np.concatenate(samples, axis=0)
    mean = s.mean(axis=0)
    se = s.std(axis=0, ddof=1) / np.sqrt(s.shape[0])
    return GapEstimate(mean, se, s.shape[0], s)
