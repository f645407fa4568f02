import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from stratflow.wiener import coarsen, dump, generate, generate_paths, load


def test_same_seed_same_bits():
    a = generate(2, 1.0, 8, 4, seed=11, path=3)
    b = generate(2, 1.0, 8, 4, seed=11, path=3)
    assert a.increments.tobytes() == b.increments.tobytes()


def test_path_streams_do_not_depend_on_batch():
    many = generate_paths(2, 1.0, 4, 4, 5, range(6))
    one = generate(2, 1.0, 4, 4, 5, path=4)
    assert np.array_equal(many.increments[4], one.increments)


def test_distinct_seeds_and_paths_differ():
    a = generate(1, 1.0, 4, 4, 0, 0).increments
    assert not np.array_equal(a, generate(1, 1.0, 4, 4, 1, 0).increments)
    assert not np.array_equal(a, generate(1, 1.0, 4, 4, 0, 1).increments)


def test_increments_are_gaussian_with_lattice_variance():
    g = generate_paths(1, 2.0, 16, 16, 3, range(64))
    z = g.increments.ravel() / np.sqrt(g.dt)
    assert stats.kstest(z, "norm").pvalue > 1e-3
    assert abs(z.var() - 1) < 0.03


def test_coarsening_powers_of_two_is_associative():
    g = generate(2, 1.0, 4, 16, 9)
    step = coarsen(coarsen(g, 2), 2)
    assert np.array_equal(step.increments, coarsen(g, 4).increments)
    assert step.Q == 4 and step.N == 4


def test_coarsen_keeps_endpoint():
    g = generate(3, 1.0, 3, 8, 2)
    np.testing.assert_allclose(coarsen(g, 8).endpoint(), g.endpoint(), atol=1e-13)
    assert coarsen(g, 8).Q == 1


def test_coarsen_rejects_bad_factor():
    g = generate(1, 1.0, 3, 4, 0)
    with pytest.raises(ValueError):
        coarsen(g, 5)


def test_with_steps_views_same_lattice():
    g = generate(1, 1.0, 4, 8, 0)
    v = g.with_steps(8)
    assert v.Q == 4 and v.h == pytest.approx(1 / 8)
    np.testing.assert_allclose(v.step_increments(), coarsen(g, 4).increments)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(1, 6), st.sampled_from([1, 2, 4]),
       st.integers(0, 2**64 - 1))
def test_dump_load_round_trip(tmp_path_factory, d, N, Q, seed):
    g = generate(d, 0.75, N, Q, seed, path=2)
    f = tmp_path_factory.mktemp("grid") / "g.bin"
    dump(g, f)
    back = load(f)
    assert (back.d, back.T, back.N, back.Q, back.seed) == (d, 0.75, N, Q, seed)
    assert back.increments.tobytes() == g.increments.tobytes()


def test_bad_shapes_rejected():
    with pytest.raises(ValueError):
        generate(0, 1.0, 1, 1, 0)
    with pytest.raises(ValueError):
        generate(1, -1.0, 1, 1, 0)
