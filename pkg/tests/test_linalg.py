import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stratflow.linalg import FlopTally, commutator, eval_flops, expm, expm_flops

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def test_expm_matches_scipy_on_fixtures(rng):
    mats = [np.zeros((3, 3)), np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]) * np.pi,
            np.array([[1.0, 1e3], [0.0, 1.0]]), rng.standard_normal((4, 4)) * 5,
            np.array([[-50.0, 0.0], [0.0, 2.0]])]
    for a in mats:
        ref = scipy.linalg.expm(a)
        assert np.linalg.norm(expm(a) - ref) <= 1e-12 * max(np.linalg.norm(ref), 1.0)


def test_expm_batched(rng):
    a = rng.standard_normal((7, 5, 3, 3))
    out = expm(a)
    assert out.shape == a.shape
    np.testing.assert_allclose(out[3, 2], scipy.linalg.expm(a[3, 2]), rtol=1e-12, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (3, 3), elements=finite))
def test_expm_inverse_and_determinant(a):
    e = expm(a)
    np.testing.assert_allclose(e @ expm(-a), np.eye(3), atol=1e-9 * np.linalg.norm(e) ** 2)
    np.testing.assert_allclose(np.linalg.det(e), np.exp(np.trace(a)), rtol=1e-9)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (2, 2), elements=finite), st.floats(-1, 1))
def test_expm_commuting_sum(a, s):
    np.testing.assert_allclose(expm(a) @ expm(s * a), expm((1 + s) * a), rtol=1e-9, atol=1e-9)


def test_expm_overflow_raises():
    with pytest.raises(FloatingPointError, match="overflow"):
        expm(np.array([[1e4, 0.0], [0.0, 0.0]]))


def test_expm_rejects_non_square():
    with pytest.raises(ValueError):
        expm(np.zeros((2, 3)))


def test_commutator_antisymmetric(rng):
    a, b = rng.standard_normal((2, 3, 3))
    np.testing.assert_allclose(commutator(a, b), -commutator(b, a))
    np.testing.assert_allclose(commutator(a, a), 0)


def test_flop_tally_counts_expm():
    t = FlopTally()
    expm(np.eye(2) * 0.1, t)
    assert t.count == expm_flops(2)
    t.add("quad", 5)
    assert t.breakdown["quad"] == 5
    assert t.merge(FlopTally()).count == t.count


def test_eval_flops_for_two_by_two():
    assert eval_flops("magnus-05", 2) == 68
    assert eval_flops("magnus-1", 2) == 76
    assert eval_flops("neumann-05", 2) > 0
