import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otsldr.errors import (
    DimensionTooLargeError,
    EmptyBoxError,
    NotFullDimensionalError,
    UnsupportedSupportError,
)
from otsldr.uncertainty import (
    box_max,
    box_support,
    is_full_dimensional,
    polytope,
    proportional_box,
    sample,
    support_max,
    vertices,
)


def test_unit_interval():
    p = box_support([-1.0], [1.0])
    assert np.array_equal(p.S, [[1.0], [-1.0]]) and np.array_equal(p.t, [1.0, 1.0])
    assert p.mu[0] == 0.0 and np.isclose(p.second_moment[0, 0], 1 / 3)


def test_square_interior():
    p = box_support([-1, -1], [1, 1])
    assert p.m == 4 and p.contains([0, 0]) and is_full_dimensional(p)


def test_proportional_box():
    nominal = np.array([20.0, 30.0])
    p = proportional_box(nominal, 0.1)
    assert np.allclose(p.box[0], -0.1 * nominal) and np.allclose(p.box[1], 0.1 * nominal)
    assert np.array_equal(p.mu, [0.0, 0.0])


def test_box_moments_off_diagonal():
    p = box_support([0.0, -2.0], [2.0, 0.0])
    assert np.isclose(p.second_moment[0, 1], 1.0 * -1.0)
    assert np.isclose(p.second_moment[0, 0], 1.0 + 4 / 12)


def test_empty_box_rejected():
    with pytest.raises(EmptyBoxError):
        box_support([0.0], [0.0])
    with pytest.raises(EmptyBoxError):
        box_support([1.0], [0.0], allow_degenerate=True)


def test_degenerate_samples_are_zero():
    p = box_support([0.0, 0.0], [0.0, 0.0], allow_degenerate=True)
    assert np.array_equal(sample(p, 7, 3), np.zeros((7, 2)))
    assert not is_full_dimensional(p)


def test_sample_mean_bound():
    # 4 sigma / sqrt(S) with sigma^2 = 1/3: 4 * 0.57735 / 316.23 = 0.0073
    xi = sample(box_support([-1.0], [1.0]), 100_000, 12345)
    assert abs(xi.mean()) < 4 * np.sqrt(1 / 3) / np.sqrt(100_000)


def test_sample_deterministic():
    p = box_support([-1, -2], [1, 3])
    assert np.array_equal(sample(p, 50, 9), sample(p, 50, 9))
    assert not np.array_equal(sample(p, 50, 9), sample(p, 50, 10))


def test_sampling_needs_box():
    p = polytope([[1.0], [-1.0]], [1.0, 1.0], [0.0])
    with pytest.raises(UnsupportedSupportError):
        sample(p, 3, 0)
    with pytest.raises(UnsupportedSupportError):
        vertices(p)


def test_vertices_small():
    assert vertices(box_support([-1.0], [1.0])).tolist() == [[-1.0], [1.0]]
    assert vertices(box_support([-1, -1], [1, 1])).tolist() == [[-1, -1], [-1, 1], [1, -1], [1, 1]]


def test_vertices_k5_active_rows():
    p = box_support(-np.arange(1, 6.0), np.arange(1, 6.0))
    V = vertices(p)
    assert V.shape == (32, 5)
    for v in V:
        assert np.sum(np.isclose(p.S @ v, p.t)) == 5


def test_vertex_guard():
    with pytest.raises(DimensionTooLargeError):
        vertices(box_support(-np.ones(21), np.ones(21)))


def test_polytope_checks():
    with pytest.raises(NotFullDimensionalError):
        polytope([[1.0], [-1.0]], [0.0, 0.0], [0.0])
    with pytest.raises(UnsupportedSupportError):
        polytope([[1.0, 0.0]], [1.0], [0.0, 0.0])


boxes = st.integers(1, 5).flatmap(lambda K: st.tuples(
    st.lists(st.floats(0.01, 10), min_size=K, max_size=K),
    st.lists(st.floats(0.01, 10), min_size=K, max_size=K),
    st.lists(st.floats(-5, 5), min_size=K, max_size=K),
))


@settings(max_examples=60, deadline=None)
@given(boxes, st.integers(0, 2**32))
def test_box_lp_matches_analytic(box, seed):
    lo_w, hi_w, a = (np.array(v) for v in box)
    p = box_support(-lo_w, hi_w)
    assert abs(support_max(p, a) - box_max(-lo_w, hi_w, a)) <= 1e-9 * max(1.0, np.abs(a).sum() * 10)
    for xi in np.vstack([sample(p, 20, seed), vertices(p)]):
        assert np.all(p.S @ xi <= p.t + 1e-12)
