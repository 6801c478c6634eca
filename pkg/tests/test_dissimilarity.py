import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsdeform import AnchorSet, Dataset, DataError, composite, epanechnikov, gamma_matrix
from nsdeform import minmax_scale, nmds_weights, ns_variogram, pairwise_distances

from conftest import random_dataset


def test_gamma_matrix_two_anchor_case():
    data = Dataset([[0.0], [1.0], [5.0]], [1.0, 4.0, 0.0])
    anchors = AnchorSet([[0.0], [1.0], [5.0]])
    g = gamma_matrix(anchors, data, 0.5)
    assert g[0, 1] == g[1, 0] == pytest.approx(9 / 2)
    np.testing.assert_array_equal(np.diag(g), 0.0)


def test_gamma_matrix_constant_and_entrywise(rng):
    pts = rng.uniform(0, 1, (6, 2))
    anchors = AnchorSet(rng.uniform(0, 1, (4, 2)))
    g = gamma_matrix(anchors, Dataset(pts, np.ones(6)), 2.0)
    np.testing.assert_array_equal(g, 0.0)
    data = Dataset(pts, rng.normal(size=6))
    g = gamma_matrix(anchors, data, 2.0)
    for i in range(4):
        for j in range(4):
            if i != j:
                assert g[i, j] == pytest.approx(
                    ns_variogram(anchors.points[i], anchors.points[j], data, 2.0), rel=1e-10)


def test_composite_endpoints(rng):
    g = rng.uniform(size=(5, 5))
    g = g + g.T
    np.fill_diagonal(g, 0)
    d = pairwise_distances(rng.uniform(size=(5, 2)))
    np.testing.assert_array_equal(composite(g, d, 0.0).delta, minmax_scale(d))
    np.testing.assert_array_equal(composite(g, d, 1.0).delta, minmax_scale(g))
    with pytest.raises(DataError):
        composite(g, d, 1.5)


def test_composite_convex_hand_case():
    g = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], float)
    d = np.array([[0, 2, 1], [2, 0, 4], [1, 4, 0]], float)
    delta = composite(g, d, 0.5).delta
    # scaled g offdiag: 1->0, 2->.5, 3->1; scaled d: 1->0, 2->1/3, 4->1
    assert delta[0, 1] == pytest.approx(0.5 * 0 + 0.5 / 3)
    assert delta[0, 2] == pytest.approx(0.5 * 1 + 0.5 * 0)
    assert delta[1, 2] == pytest.approx(0.5 * 0.5 + 0.5 * 1)


@given(st.integers(0, 2**31), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=50)
def test_composite_bounds_monotone_symmetric(seed, w1, w2):
    rng = np.random.default_rng(seed)
    g = rng.uniform(size=(6, 6))
    g = g + g.T
    np.fill_diagonal(g, 0)
    d = pairwise_distances(rng.uniform(size=(6, 2)))
    lo, hi = sorted((w1, w2))
    a, b = composite(g, d, lo).delta, composite(g, d, hi).delta
    for m in (a, b):
        assert m.min() >= 0 and m.max() <= 1 + 1e-15
        np.testing.assert_array_equal(m, m.T)
        np.testing.assert_array_equal(np.diag(m), 0)
    g0, g1 = minmax_scale(d), minmax_scale(g)
    # moving omega up moves every entry towards the variogram endpoint
    assert np.all((b - a) * (g1 - g0) >= -1e-15)


def test_weights_hand_case_and_empty_support():
    data = Dataset([[0.0], [1.0]], [1.0, 4.0])
    anchors = AnchorSet([[0.0], [1.0], [10.0]])
    w = nmds_weights(anchors, data, 2.0).weights
    k = lambda a, s: epanechnikov([a], [s], 2.0)
    mass = lambda a: k(a, 0.0) + k(a, 1.0)
    assert w[0, 1] == pytest.approx(mass(0.0) * mass(1.0) / 1.0)
    assert w[0, 2] == 0.0 and w[1, 2] == 0.0
    np.testing.assert_array_equal(w, w.T)


def test_weights_grow_with_data(rng):
    data = random_dataset(rng, 10)
    anchors = AnchorSet(rng.uniform(0, 1, (5, 2)))
    w0 = nmds_weights(anchors, data, 0.7).weights
    bigger = Dataset(np.vstack([data.coords, [[0.5, 0.5]]]), np.r_[data.values, 0.0])
    w1 = nmds_weights(anchors, bigger, 0.7).weights
    assert np.all(w1 >= w0)
