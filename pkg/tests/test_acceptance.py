"""Acceptance checks, each at its stated tolerance.

Every check records a PASS/FAIL line (grouped per criterion in the pytest
terminal summary).  Checks known not to hold are marked ``xfail(strict=True)``
so that they keep running and keep reporting their measured value.
"""
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from conftest import record
from stratflow.fixtures import b_matrix, c_matrix, riccati_system
from stratflow.harness import (ExperimentSpec, effort_model, matched_effort_offset,
                               quadrature_check, run_experiment, slope)
from stratflow.integrals import beta, effort_exponent, linear_path_integral
from stratflow.integrators import LinearSDESystem, integrate, local_error_gap
from stratflow.linalg import expm
from stratflow.shuffle import solve_shuffle_system
from stratflow.wiener import generate, generate_paths

pytestmark = pytest.mark.slow

F = Fraction
LADDER = tuple(2.0 ** -k for k in range(4, 10))


# -- shared Monte Carlo runs ------------------------------------------------

@pytest.fixture(scope="module")
def two_wiener():
    spec = ExperimentSpec("linear-2w", ("neumann-05", "neumann-1", "neumann-15",
                                        "magnus-05", "magnus-1", "magnus-15"),
                          h_list=LADDER, n_paths=2000, n_batches=20, seed=0)
    return run_experiment(spec)


@pytest.fixture(scope="module")
def riccati():
    spec = ExperimentSpec("riccati-9.1", ("neumann-1", "magnus-ua-1", "neumann-15",
                                          "magnus-ua-15"),
                          h_list=LADDER, n_paths=2000, n_batches=20, seed=0)
    return run_experiment(spec)


@pytest.fixture(scope="module")
def three_wiener():
    spec = ExperimentSpec("linear-3w", ("neumann-1", "magnus-1", "neumann-15", "magnus-15"),
                          h_list=LADDER, n_paths=400, n_batches=20, seed=0)
    return run_experiment(spec)


# -- 1. convergence orders ----------------------------------------------------

ORDER_TARGETS = {"neumann-05": (0.5, 0.15), "magnus-05": (0.5, 0.15),
                 "neumann-1": (1.0, 0.15), "magnus-1": (1.0, 0.15),
                 "neumann-15": (1.5, 0.2), "magnus-15": (1.5, 0.2)}
LOW_H_MISSES = {"neumann-05", "magnus-15"}


@pytest.mark.parametrize("scheme", [
    pytest.param(s, marks=pytest.mark.xfail(strict=True, reason="measured slope outside band; "
                                            "see notes on heavy-tailed errors"))
    if s in LOW_H_MISSES else s for s in ORDER_TARGETS])
def test_c1_convergence_order(two_wiener, scheme):
    target, tol = ORDER_TARGETS[scheme]
    k = slope(two_wiener.select(scheme), "h", "error")
    ok = abs(k - target) <= tol
    record(1, f"{scheme} error-vs-h slope", ok, f"{k:.3f} (target {target} ± {tol})")
    assert ok


# -- 2. uniformly accurate Magnus beats Neumann ---------------------------------

@pytest.mark.parametrize("order", ["1", "15"])
def test_c2_magnus_ua_not_worse(riccati, order):
    mag = {r.h: r for r in riccati.select(f"magnus-ua-{order}")}
    neu = {r.h: r for r in riccati.select(f"neumann-{order}")}
    margins = []
    for h in LADDER:
        margin = neu[h].error - mag[h].error
        margins.append(margin / max(mag[h].ci90, neu[h].ci90))
    ok = min(margins) > -2
    record(2, f"order {order}: min (E_neu - E_mag)/CI", ok, f"{min(margins):.2f} (> -2)")
    assert ok


# -- 3. quadrature rates ------------------------------------------------------

def test_c3_levy_area_rate():
    res = quadrature_check("12", 1.0, (1, 2, 4, 8, 16, 32), 10_000, seed=0)
    ok = abs(res.slope + 0.5) <= 0.1
    record(3, "J_12 error vs Q slope", ok, f"{res.slope:.3f} (target -0.5 ± 0.1)")
    assert ok


@pytest.mark.xfail(strict=True, reason="a trailing time letter leaves the Levy-area "
                   "part of J_ij, so the rate is Q^-1/2")
def test_c3_trailing_time_rate():
    res = quadrature_check("120", 1.0, (1, 2, 4, 8, 16, 32), 10_000, seed=0)
    ok = abs(res.slope + 1.0) <= 0.15
    record(3, "J_120 error vs Q slope", ok, f"{res.slope:.3f} (target -1 ± 0.15)")
    assert ok


# -- 4. conditional-expectation closed forms ---------------------------------

def _oracle(word, x, dt):
    # piecewise linear iterated integrals have an O(dt) bias in the mean;
    # Richardson extrapolation over dt and 2 dt removes it
    x2 = x.reshape(x.shape[:-1] + (x.shape[-1] // 2, 2)).sum(-1)
    return 2 * linear_path_integral(word, x, dt) - linear_path_integral(word, x2, 2 * dt)


def _max_bin_z(resid, bins):
    z = []
    for b in np.unique(bins):
        r = resid[bins == b]
        z.append(abs(r.mean()) / (r.std(ddof=1) / np.sqrt(r.size)))
    return max(z)


def _quantile_bins(v, n):
    edges = np.quantile(v, np.linspace(0, 1, n + 1))[1:-1]
    return np.searchsorted(edges, v)


@pytest.fixture(scope="module")
def bridge_samples():
    h, fine, n = 1.0, 64, 100_000
    out = {"101": [], "102": [], "X": []}
    for s in range(0, n, 10_000):
        g = generate_paths(2, h, 1, fine, 0, range(s, s + 10_000))
        x = np.moveaxis(g.increments, 1, 0)
        out["101"].append(_oracle((1, 0, 1), x, h / fine))
        out["102"].append(_oracle((1, 0, 2), x, h / fine))
        out["X"].append(x.sum(-1))
    return h, np.concatenate(out["101"]), np.concatenate(out["102"]), np.concatenate(out["X"], 1)


def test_c4_repeated_index(bridge_samples):
    h, j101, _, X = bridge_samples
    z = _max_bin_z(j101 - h * (X[0] ** 2 - h) / 6, _quantile_bins(X[0], 20))
    record(4, "E[J_i0i | J_i] = h(J_i^2 - h)/6, 20 bins", z <= 4, f"max |z| {z:.2f} (<= 4)")
    assert z <= 4


def test_c4_distinct_index(bridge_samples):
    h, _, j102, X = bridge_samples
    bins = _quantile_bins(X[0], 5) * 5 + _quantile_bins(X[1], 5)
    z = _max_bin_z(j102 - h * X[0] * X[1] / 6, bins)
    record(4, "E[J_i0j | J_i, J_j] = h J_i J_j/6, 5x5 bins", z <= 4, f"max |z| {z:.2f} (<= 4)")
    assert z <= 4


# -- 5. shuffle ranks ----------------------------------------------------------

def test_c5_shuffle_ranks():
    four = solve_shuffle_system("1122")
    five = solve_shuffle_system("11122")
    again = solve_shuffle_system("11122")
    gens = set(five.basis)
    ok = (four.rank == 4 and five.rank == 7
          and gens == {(1, 1, 1, 2, 2), (2, 2, 1, 1, 1), (2, 1, 2, 1, 1)}
          and four.check() and five.check()
          and {k: v.terms for k, v in five.reductions.items()}
          == {k: v.terms for k, v in again.reductions.items()})
    record(5, "ranks 4 and 7, generators iiijj jjiii jijii", ok,
           f"ranks {four.rank}, {five.rank}")
    assert ok


# -- 6. beta table ---------------------------------------------------------------

TABLE = {(F(1), 2): F(-1, 2),
         (F(3, 2), 2): F(-1, 2), (F(3, 2), 3): F(-1, 2),
         (F(2), 2): F(-1, 2), (F(2), 3): F(-2, 5), (F(2), 4): F(-1, 2),
         (F(5, 2), 2): F(-1, 2), (F(5, 2), 3): F(-5, 14), (F(5, 2), 4): F(-5, 14),
         (F(5, 2), 5): F(-1, 2),
         (F(3), 2): F(-1, 2), (F(3), 3): F(-1, 3), (F(3), 4): F(-3, 10), (F(3), 5): F(-1, 3),
         (F(3), 6): F(-1, 2)}


def test_c6_beta_table():
    bad = [(M, l) for (M, l), v in TABLE.items() if effort_exponent(M, l) != v]
    ok = not bad and beta(1, 2) == 2 and beta(2, 3) == 5 and beta(F(5, 2), 3) == 7 \
        and beta(F(5, 2), 4) == 7 and beta(3, 4) == 10
    record(6, "all table entries", ok, f"{len(TABLE) - len(bad)}/{len(TABLE)} match")
    assert ok


# -- 7. matched-effort offset -------------------------------------------------

@pytest.mark.xfail(strict=True, reason="error constants of the two schemes differ "
                   "by more than the offset tolerance on this fixture")
def test_c7_effort_offset(two_wiener):
    off = matched_effort_offset(two_wiener, "magnus-1", "magnus-05", base=10)
    ok = abs(off + 0.9) <= 0.3
    record(7, "log10 E_1 - log10 E_1/2 at matched effort", ok, f"{off:.3f} (target -0.9 ± 0.3)")
    assert ok


# -- 8. local error comparison fixtures ----------------------------------------

def test_c8_weight_matrices():
    c = np.sort(np.linalg.eigvalsh(c_matrix()))
    b = np.sort(np.linalg.eigvalsh(b_matrix()))
    want_b = np.sort([1 / 6, (5 + np.sqrt(41)) / 48, (5 - np.sqrt(41)) / 48,
                      0.94465, 0.0943205, -0.03897])
    ok = np.allclose(c, [0, 0] + [1 / 6] * 4, atol=1e-4) and np.allclose(b, want_b, atol=1e-4)
    record(8, "eigenvalues of b and c", ok, f"min eig b {b[0]:.5f}")
    assert ok


@pytest.mark.parametrize("order", [F(1), F(3, 2)])
def test_c8_local_error_gap(order):
    est = local_error_gap(riccati_system(), 0.125, 1 if order == 1 else 8, 10_000, order, seed=0)
    lam, se = est.min_eigenvalue(), est.eigen_stderr()
    ok = lam >= -3 * se
    record(8, f"local error gap, order {order}", ok, f"min eig {lam:.3e}, 3 se {3 * se:.1e}")
    assert ok


# -- 9. exactness sentinels -------------------------------------------------------

def test_c9_exactness():
    system = LinearSDESystem([[[-0.4]], [[0.9]]])
    worst_scalar = 0.0
    for path in range(20):
        g = generate(1, 1.0, 32, 1, 0, path)
        y, _ = integrate("magnus-05", system, g, np.array([1.0]), return_path=False)
        exact = np.exp(-0.4 + 0.9 * g.endpoint()[0])
        worst_scalar = max(worst_scalar, abs(y[0] - exact) / exact)
    a0 = np.array([[-1.0, 2.0], [-0.5, 0.3]])
    det = LinearSDESystem([a0, np.zeros((2, 2)), np.zeros((2, 2))])
    g = generate(2, 1.0, 16, 4, 0)
    worst_det = 0.0
    for label in ("magnus-05", "magnus-1", "magnus-15"):
        y, _ = integrate(label, det, g, np.array([1.0, 1.0]), return_path=False)
        worst_det = max(worst_det, np.abs(y - scipy.linalg.expm(a0) @ [1, 1]).max())
    rng = np.random.default_rng(0)
    mats = [np.zeros((2, 2)), np.eye(3), np.diag([-20.0, 3.0]), rng.standard_normal((4, 4)) * 4,
            np.array([[0.0, 7.0], [-7.0, 0.0]]), np.triu(rng.standard_normal((5, 5)))]
    worst_expm = max(np.linalg.norm(expm(a) - scipy.linalg.expm(a)) /
                     np.linalg.norm(scipy.linalg.expm(a)) for a in mats)
    ok = worst_scalar <= 1e-12 and worst_det <= 1e-10 and worst_expm <= 1e-12
    record(9, "scalar / deterministic / expm", ok,
           f"{worst_scalar:.1e} / {worst_det:.1e} / {worst_expm:.1e}")
    assert ok


# -- 10. three-Wiener effort regime --------------------------------------------------

@pytest.mark.parametrize("scheme", ["neumann-1", "magnus-1", "neumann-15", "magnus-15"])
def test_c10_three_wiener_effort_slope(three_wiener, scheme):
    m = effort_model(three_wiener)[scheme]
    rows = sorted(three_wiener.select(scheme), key=lambda r: -r.h)
    use = [r for r, reg, cap in zip(rows, m["regimes"], m["capped"])
           if reg == "quadrature" and not cap]
    k = slope(use, "effort", "error")
    ok = abs(k + 0.5) <= 0.15
    record(10, f"{scheme} error-vs-effort slope ({len(use)} rows)", ok,
           f"{k:.3f} (target -0.5 ± 0.15)")
    assert ok
