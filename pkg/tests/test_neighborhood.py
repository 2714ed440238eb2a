import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from vpwgraph.dataset import DataMatrix
from vpwgraph.errors import ValidationError
from vpwgraph.neighborhood import (build_knn_graph, neighborhood_stats, read_edge_dump,
                                   write_graph_dump)

from _oracles import brute_knn
from conftest import random_cloud


def edge_set(g):
    i, j, e = g.edges()
    return {(int(a), int(b)): float(v) for a, b, v in zip(i, j, e)}


def test_collinear_three_points():
    g = build_knn_graph(DataMatrix(np.array([[0.0], [1.0], [3.0]])), 1)
    assert edge_set(g) == {(0, 1): 1.0, (1, 2): 4.0}
    assert g.degrees.tolist() == [1, 2, 1]


def test_complete_graph_when_k_is_n_minus_one():
    g = build_knn_graph(random_cloud(0, n=12), 11)
    assert np.all(g.degrees == 11)


def test_duplicates_allowed():
    g = build_knn_graph(DataMatrix(np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0]])), 1)
    assert edge_set(g)[(0, 1)] == 0.0


@pytest.mark.parametrize("k", [0, 5])
def test_k_out_of_range(k):
    with pytest.raises(ValidationError):
        build_knn_graph(DataMatrix(np.zeros((5, 1)) + np.arange(5)[:, None]), k)


def test_tie_break_prefers_smaller_index():
    # point 1 is equidistant from 0 and 2
    g = build_knn_graph(DataMatrix(np.array([[0.0], [1.0], [2.0]])), 1)
    assert g.knn_idx[1, 0] == 0


@pytest.mark.parametrize("seed,n,k", [(0, 50, 3), (1, 120, 7), (2, 200, 10)])
def test_knn_lists_match_brute_force(seed, n, k):
    data = random_cloud(seed, n=n, D=4)
    g = build_knn_graph(data, k)
    assert g.knn_idx.tolist() == brute_knn(data.points, k)


def test_symmetry_and_mean_degree(small_blobs):
    g = build_knn_graph(small_blobs, 6)
    for i in range(g.n):
        nbrs, e = g.neighbors(i)
        assert i not in nbrs
        assert np.all(e >= 0) and np.all(np.isfinite(e))
        for j, eij in zip(nbrs, e):
            back, eb = g.neighbors(j)
            pos = np.flatnonzero(back == i)
            assert pos.size == 1 and eb[pos[0]] == eij
    assert g.mean_degree == pytest.approx(g.degrees.mean())
    assert g.degrees.min() >= 6


def test_permutation_gives_isomorphic_graph(rng):
    data = random_cloud(4, n=40)
    perm = rng.permutation(40)
    g1 = build_knn_graph(data, 4)
    g2 = build_knn_graph(DataMatrix(data.points[perm]), 4)
    mapped = {tuple(sorted((int(perm[a]), int(perm[b])))): v for (a, b), v in edge_set(g2).items()}
    assert mapped == edge_set(g1)


def test_stats_arithmetic():
    # centre at origin with neighbours at distances 1, 2, 3 (star graph k=... via explicit points)
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [-3.0, 0.0]])
    g = build_knn_graph(DataMatrix(pts), 3)
    s = neighborhood_stats(g, DataMatrix(pts))
    assert s.b[0] == pytest.approx(2.0)
    assert s.nu[0] == pytest.approx(2.0)
    assert s.delta_sq[0] == pytest.approx(2.0 / 3.0)
    np.testing.assert_allclose(s.c[0], pts[1:].mean(axis=0))


def test_centroid_midpoint():
    pts = np.array([[1.0, 0.0], [0.0, 0.0], [2.0, 0.0]])
    g = build_knn_graph(DataMatrix(pts), 2)
    s = neighborhood_stats(g, DataMatrix(pts))
    np.testing.assert_allclose(s.c[0], [1.0, 0.0])


def test_delta_floor_on_constant_neighbourhood():
    pts = np.array([[0.0], [1.0], [-1.0]])
    g = build_knn_graph(DataMatrix(pts), 2)
    s = neighborhood_stats(g, DataMatrix(pts))
    assert s.delta_sq[0] == 1e-12


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (15, 2), elements=st.floats(-10, 10, allow_nan=False)),
       st.integers(1, 5))
def test_stats_invariants(points, k):
    data = DataMatrix(points)
    g = build_knn_graph(data, k)
    s = neighborhood_stats(g, data)
    assert np.all(s.b >= 0)
    assert np.all(s.delta_sq >= 1e-12)
    for i in range(g.n):
        nbrs, _ = g.neighbors(i)
        lo = points[nbrs].min(axis=0) - 1e-9
        hi = points[nbrs].max(axis=0) + 1e-9
        assert np.all(s.c[i] >= lo) and np.all(s.c[i] <= hi)


def test_graph_dump_format(tmp_path):
    g = build_knn_graph(DataMatrix(np.array([[0.0], [0.1], [3.0]])), 1)
    p = tmp_path / "g.txt"
    write_graph_dump(g, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "0 1 0.010000000000000002"
    i, j, e = read_edge_dump(p)
    assert np.all(i < j)
    np.testing.assert_array_equal(e, g.edges()[2])
