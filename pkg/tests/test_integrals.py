from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratflow.integrals import (IntegralTable, beta, bridge_polynomial,
                                 conditional_expectation, critical_stepsize, effort_exponent,
                                 expected_signature, expected_value, linear_path_integral,
                                 q_for_word, quadrature_rate, step_increments, word_stats)
from stratflow.linalg import FlopTally
from stratflow.shuffle import shuffle_product
from stratflow.wiener import generate_paths

F = Fraction


def fine_paths(d, n_paths, fine, seed=1, h=1.0):
    g = generate_paths(d, h, 1, fine, seed, range(n_paths))
    return np.moveaxis(g.increments, 1, 0), h / fine


def bridge_refinements(X, q, n, rng, h=1.0):
    """``n`` Brownian bridge fillings of the endpoint increments ``X`` (d,)."""
    dt = h / q
    z = rng.standard_normal((len(X), n, q)) * np.sqrt(dt)
    z -= z.mean(axis=-1, keepdims=True)
    return z + X[:, None, None] / q


# frozen from the tiling formula; the Monte Carlo test below is the oracle
EXPECTED = {(1, 1): (F(1, 2), 1), (1, 2): (F(0), 1), (1, 1, 2, 2): (F(1, 8), 2),
            (0, 1, 1): (F(1, 4), 2), (1, 1, 0): (F(1, 4), 2), (1, 0, 1): (F(0), 2),
            (1, 1, 1, 1): (F(1, 8), 2), (0,): (F(1), 1), (0, 0): (F(1, 2), 2)}


@pytest.mark.parametrize("word", sorted(EXPECTED))
def test_expected_signature_values(word):
    assert expected_signature(word) == EXPECTED[word]


def test_expected_signature_against_monte_carlo():
    x, dt = fine_paths(2, 20000, 32)
    for word, (c, k) in EXPECTED.items():
        v = linear_path_integral(word, x, dt)
        se = v.std() / np.sqrt(v.size)
        assert abs(v.mean() - float(c)) <= 4 * se + 1e-12 + 0.02 * abs(float(c)), word


def test_expected_value_scales_with_h():
    assert expected_value("1122", 0.5) == pytest.approx(0.25 ** 1 / 8)
    assert expected_value("011", 0.1) == pytest.approx(0.01 / 4)


def test_bridge_base_cases():
    x1, x2, dlt = 0.7, -1.3, 0.25
    x = {1: x1, 2: x2}
    assert bridge_polynomial((1, 0, 1))(x, dlt) == pytest.approx(dlt * (x1 ** 2 - dlt) / 6)
    assert bridge_polynomial((1, 0, 2))(x, dlt) == pytest.approx(dlt * x1 * x2 / 6)
    assert bridge_polynomial((1, 1, 2))(x, dlt) == pytest.approx(x1 ** 2 * x2 / 6 + dlt * x2 / 12)
    assert bridge_polynomial((1, 2))(x, dlt) == pytest.approx(x1 * x2 / 2)
    assert bridge_polynomial((1, 0))(x, dlt) == pytest.approx(dlt * x1 / 2)


@pytest.mark.parametrize("word", [(1, 2), (1, 0), (1, 1, 2), (1, 2, 1), (1, 0, 2), (2, 1, 1, 2)])
def test_bridge_matches_conditional_monte_carlo(word, rng):
    X = np.array([0.9, -0.4])
    x = bridge_refinements(X, 64, 20000, rng)
    v = linear_path_integral(word, x, 1 / 64)
    pred = bridge_polynomial(word)({1: X[0], 2: X[1]}, 1.0)
    assert abs(v.mean() - pred) <= 4 * v.std() / np.sqrt(v.size) + 1e-3


@pytest.mark.parametrize("word", [(1, 2), (1, 2, 0), (1, 0, 2), (2, 1, 1), (1, 2, 1, 2)])
def test_conditioning_is_unbiased(word):
    x, _ = fine_paths(2, 40000, 8, seed=4)
    est = conditional_expectation(word, x, 1 / 8)
    assert abs(est.mean() - expected_value(word, 1.0)) <= 4 * est.std() / np.sqrt(est.size) + 1e-12


@pytest.mark.parametrize("word", [(1, 2), (1, 2, 0), (2, 1, 2), (1, 1, 2, 2)])
def test_tower_property(word, rng):
    # averaging E[J | F_Q] over bridge fillings recovers E[J | F_1]
    X = np.array([1.1, 0.3])
    x = bridge_refinements(X, 8, 40000, rng)
    fine = conditional_expectation(word, x, 1 / 8)
    coarse = bridge_polynomial(word)({1: X[0], 2: X[1]}, 1.0)
    assert abs(fine.mean() - coarse) <= 4 * fine.std() / np.sqrt(fine.size) + 1e-12


def test_single_subinterval_equals_bridge(rng):
    x = rng.standard_normal((2, 10, 1))
    val = conditional_expectation((1, 2, 1), x, 1.0)
    np.testing.assert_allclose(val, bridge_polynomial((1, 2, 1))({1: x[0, :, 0], 2: x[1, :, 0]}, 1.0))


small_words = st.lists(st.integers(0, 2), min_size=1, max_size=2).map(tuple)


@settings(max_examples=30, deadline=None)
@given(small_words, small_words, st.sampled_from([1, 2, 4]))
def test_shuffle_relations_survive_conditioning_by_known_words(u, v, q):
    # when J_u is F_Q-measurable (a single letter), E[J_u J_v | F_Q] = J_u E[J_v | F_Q]
    u = u[:1]
    if u == (0,):
        u = (1,)
    rng = np.random.default_rng(len(v) * 7 + q)
    x = rng.standard_normal((2, 50, q)) * np.sqrt(0.5 / q)
    dt = 0.5 / q
    lhs = x[u[0] - 1].sum(-1) * conditional_expectation(v, x, dt)
    rhs = sum(float(c) * conditional_expectation(w, x, dt)
              for (w,), c in shuffle_product(u, v).terms.items())
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_quadrature_ops_counted():
    t = FlopTally()
    conditional_expectation((1, 2, 0), np.zeros((2, 5, 8)), 0.1, t)
    assert t.count == 2 * 8 * 5


def test_long_words_rejected():
    with pytest.raises(ValueError, match="12121"):
        conditional_expectation((1, 2, 1, 2, 1), np.zeros((2, 3, 2)), 0.1)


def test_word_stats_and_rates():
    s = word_stats((1, 2, 0))
    assert (s.length, s.zeros, s.jstar, s.nstar) == (3, 1, 2, 1)
    assert quadrature_rate((1, 2)) == (1, F(1, 2))
    assert quadrature_rate((1, 2, 0)) == (2, 1)
    assert quadrature_rate((1, 0, 2)) == (2, 1)
    with pytest.raises(ValueError):
        quadrature_rate((1, 1))


def test_beta_and_effort_exponent():
    assert beta(1, 2) == 2 and effort_exponent(1, 2) == F(-1, 2)
    assert beta(2, 3) == 5 and effort_exponent(2, 3) == F(-2, 5)
    assert beta(F(5, 2), 3) == beta(F(5, 2), 4) == 7
    assert beta(3, 4) == 10 and effort_exponent(3, 4) == F(-3, 10)
    with pytest.raises(ValueError):
        beta(1, 3)
    with pytest.raises(ValueError):
        beta(F(1, 3), 2)


def test_critical_stepsize_two_by_two():
    assert critical_stepsize(1, 2, 2, 1.0, "magnus-1") == pytest.approx(1 / 76)


def test_q_rule():
    assert q_for_word((1, 2), 2.0 ** -4, 1) == 16
    assert q_for_word((1, 2), 2.0 ** -4, 1, q_max=8) == 8
    assert q_for_word((1, 2, 0), 2.0 ** -4, F(3, 2)) == 1
    assert q_for_word((1, 2), 2.0 ** -4, F(1, 2)) == 1


def test_step_increments_shapes():
    g = generate_paths(2, 1.0, 4, 8, 0, range(3))
    x = step_increments(g, 4, 2)
    assert x.shape == (2, 3, 4, 2)
    np.testing.assert_allclose(x.sum(-1), np.moveaxis(g.step_increments(), 1, 0))
    np.testing.assert_allclose(step_increments(g.increments, 4, 2), x)


def test_table_derived_words_match_direct_conditioning():
    g = generate_paths(2, 1.0, 4, 16, 3, range(20))
    words = [(1, 2), (2, 1), (1, 1, 2), (1, 2, 1), (2, 1, 1)]
    table = IntegralTable.build(words, g, 1.0, 4, 1, q_fixed=16)
    x = step_increments(g, 4, 16)
    derived = [w for w in words if table.provenance[w] == "derived"]
    assert derived
    for w in words:
        np.testing.assert_allclose(table[w], conditional_expectation(w, x, 1 / 64),
                                   rtol=1e-10, atol=1e-12)
    with pytest.raises(KeyError, match="212"):
        table[(2, 1, 2)]


def test_table_expectation_and_exact_entries():
    g = generate_paths(1, 1.0, 2, 4, 0, range(2))
    t = IntegralTable.build([(1, 1), (0,)], g, 1.0, 2, 1, expectation_words=[(1, 1, 0)])
    assert t.provenance[(1, 1)] == "exact" and t.provenance[(1, 1, 0)] == "expectation"
    assert t[(1, 1, 0)] == pytest.approx(0.5 ** 2 / 4)
