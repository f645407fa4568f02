import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratflow.config import ConfigError, parse_config, render_config
from stratflow.harness import ExperimentSpec

TEXT = """
# two-Wiener convergence run
fixture = linear-2w
schemes = magnus-05, magnus-1
h = 2^-4..2^-6
n_paths = 40
n_batches = 10
seed = 7
"""


def test_parse_basic():
    spec = parse_config(TEXT)
    assert spec.schemes == ("magnus-05", "magnus-1")
    assert spec.h_list == (2 ** -4, 2 ** -5, 2 ** -6)
    assert spec.n_paths == 40 and spec.seed == 7


def test_round_trip_is_idempotent():
    once = render_config(parse_config(TEXT))
    assert render_config(parse_config(once)) == once


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 9), st.integers(0, 3), st.integers(1, 50), st.integers(0, 2**64 - 1),
       st.sampled_from(["auto", "4", "16"]))
def test_round_trip_property(k, extra, batches, seed, q):
    spec = ExperimentSpec("linear-3w", ("neumann-1", "magnus-15"),
                          h_list=tuple(2.0 ** -j for j in range(k, k + extra + 1)),
                          n_paths=batches * 10, n_batches=batches, seed=seed, q_rule=q)
    back = parse_config(render_config(spec))
    assert back == spec


def test_decimal_and_list_stepsizes():
    spec = parse_config("fixture = linear-2w\nschemes = magnus-1\nh = 0.25, 2^-3\n"
                        "n_paths = 10\nn_batches = 10\nlattice = 1024\n")
    assert spec.h_list == (0.25, 0.125)


@pytest.mark.parametrize("text,msg", [
    ("fixture = linear-2w\nschemes = magnus-1\ncolour = red\n", "colour"),
    ("fixture = linear-2w\nschemes = magnus-1\nseed = 1\nseed = 2\n", "seed"),
    ("fixture = linear-2w\nschemes =\n", "empty"),
    ("fixture linear-2w\n", "line 1"),
    ("fixture = linear-2w\nschemes = magnus-1\nn_paths = many\n", "n_paths"),
])
def test_rejections(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)
