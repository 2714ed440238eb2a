import numpy as np
import pytest

from vpwgraph import bandwidth as bw
from vpwgraph.dataset import DataMatrix
from vpwgraph.errors import NumericError, ValidationError
from vpwgraph.neighborhood import build_knn_graph

from _oracles import grid_scan_beta, perplexity_at
from conftest import random_cloud


def line(*xs):
    return DataMatrix(np.array(xs, dtype=float)[:, None])


def ring(m, radius=1.0):
    t = 2 * np.pi * np.arange(m) / m
    return DataMatrix(radius * np.column_stack([np.cos(t), np.sin(t)]))


class TestSilverman:
    def test_closed_form_values(self):
        # (4 sigma^5 / 3n)^(1/5), evaluated by hand
        assert bw.silverman_value(1.0, 1) == pytest.approx(1.059224, abs=1e-6)
        assert bw.silverman_value(1.0, 4) == pytest.approx(0.802742, abs=1e-6)

    def test_uses_root_mean_variance(self, rng):
        X = rng.normal(size=(50, 3)) * [1.0, 2.0, 3.0]
        est = bw.fpw_silverman(DataMatrix(X))
        sigma = np.sqrt(X.var(axis=0).mean())
        assert est.global_ == pytest.approx((4 * sigma ** 5 / (3 * 50)) ** 0.2)

    def test_degenerate(self):
        with pytest.raises(ValidationError, match="degenerate"):
            bw.fpw_silverman(DataMatrix(np.ones((5, 2))))


class TestGlobal:
    def test_mean_constant_edges(self):
        assert bw.fpw_mean(build_knn_graph(ring(10, 1.0), 2)).global_ == pytest.approx(2 * np.sin(np.pi / 10))

    def test_mean_single_edge(self):
        assert bw.fpw_mean(build_knn_graph(line(0, 3), 1)).global_ == 3.0

    def test_mean_of_b(self):
        # b = {1, 1, 2}... line 0,1,3 with k=1: b_0=1, b_1=(1+2)/2, b_2=2
        g = build_knn_graph(line(0, 1, 3), 1)
        assert bw.fpw_mean(g).global_ == pytest.approx(np.mean([1.0, 1.5, 2.0]))

    @pytest.mark.parametrize("v", [0.5, 1e6])
    def test_user_passthrough(self, v):
        assert bw.fpw_user(v).global_ == v

    @pytest.mark.parametrize("v", [0.0, -1.0, float("nan")])
    def test_user_guard(self, v):
        with pytest.raises(ValidationError):
            bw.fpw_user(v)


class TestLocal:
    def test_k7_collinear(self):
        est = bw.k7_local(build_knn_graph(line(0, 1, 3), 1), r=1)
        np.testing.assert_allclose(est.per_point, [1.0, 1.0, 2.0])

    def test_k7_duplicate_clamped(self):
        g = build_knn_graph(line(0, 0, 5), 1)
        with pytest.warns(RuntimeWarning):
            est = bw.k7_local(g, r=1)
        assert est.per_point[0] == 1e-12

    def test_k7_uniform_grid(self):
        est = bw.k7_local(build_knn_graph(ring(20), 4), r=3)
        np.testing.assert_allclose(est.per_point, est.per_point[0], rtol=1e-12)

    def test_k7_rank_too_large(self):
        with pytest.raises(ValidationError, match="point"):
            bw.k7_local(build_knn_graph(ring(20), 4), r=7)

    def test_mmm_arithmetic(self):
        # centre 0 has neighbours at 1, 2, 3
        pts = DataMatrix(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [-3.0, 0.0]]))
        est = bw.mmm_local(build_knn_graph(pts, 3))
        assert est.per_point[0] == pytest.approx(1 + 3 - 2)

    def test_mmm_singleton_and_constant(self):
        assert bw.mmm_local(build_knn_graph(line(0, 5), 1)).per_point[0] == pytest.approx(5.0)
        est = bw.mmm_local(build_knn_graph(ring(12), 2))
        np.testing.assert_allclose(est.per_point, 2 * np.sin(np.pi / 12), rtol=1e-12)


class TestEntropic:
    def test_uniform_neighbourhood(self):
        beta, attained, _ = bw.perplexity_search(np.full(4, 2.5), 4.0)
        assert np.isfinite(beta) and abs(attained - 4.0) <= 1e-4

    def test_near_one_perplexity_concentrates(self):
        beta, attained, _ = bw.perplexity_search(np.array([1.0, 2.0, 3.0]), 1 + 1e-6)
        w = np.exp(-beta * np.array([0.0, 1.0, 2.0]))
        assert w[0] / w.sum() > 0.999

    def test_matches_grid_scan(self):
        e = np.array([1.0, 2.0, 3.0])
        beta, attained, _ = bw.perplexity_search(e, 2.0)
        assert abs(attained - 2.0) <= 1e-4
        ref_beta, ref_err = grid_scan_beta(e, 2.0, lo=-5, hi=5, num=20001)
        # grid spacing in log2(beta) is 5e-4
        assert ref_err < 1e-3
        assert abs(np.log2(beta) - np.log2(ref_beta)) < 1e-3
        assert perplexity_at(e, beta) == pytest.approx(2.0, abs=1e-4)

    def test_unreachable(self):
        with pytest.raises(NumericError, match="attained"):
            bw.perplexity_search(np.full(3, 1.0), 2.0)

    def test_graph_estimate_all_points(self):
        g = build_knn_graph(random_cloud(5, n=80), 6)
        est = bw.ea_perplexity(g, 5.0)
        assert np.all(np.abs(est.attained - 5.0) <= 1e-4)
        assert est.kind is bw.BandwidthKind.EA

    def test_default_perplexity_is_k_minus_one(self):
        g = build_knn_graph(random_cloud(6, n=40), 5)
        assert np.allclose(bw.ea_perplexity(g).attained, 4.0, atol=1e-4)

    def test_complete_support(self):
        data = random_cloud(7, n=30)
        g = build_knn_graph(data, 4)
        est = bw.ea_perplexity(g, 10.0, support="complete", data=data)
        assert np.all(np.abs(est.attained - 10.0) <= 1e-4)

    def test_range_guard(self):
        g = build_knn_graph(random_cloud(8, n=20), 3)
        with pytest.raises(ValidationError):
            bw.ea_perplexity(g, 1.0)


class TestVpw:
    def test_uniform_degrees(self):
        # D=3, all degrees 10 -> 2*5*10/100
        assert bw.vpw_factor(10, 10, 10.0, 3) == pytest.approx(1.0)

    def test_mixed_degrees(self):
        assert bw.vpw_factor(4, 8, 6.0, 2) == pytest.approx(1.5)

    def test_regular_graph_constant(self):
        g = build_knn_graph(ring(30), 4)
        assert np.all(g.degrees == 4)
        est = bw.vpw_edge(g, 2)
        assert np.all(est.per_edge == 2 * (2 + 2) / 4)

    def test_symmetric_in_endpoints(self, small_blobs):
        g = build_knn_graph(small_blobs, 5)
        i, j, _ = g.edges()
        deg = g.degrees
        np.testing.assert_array_equal(bw.vpw_factor(deg[i], deg[j], g.mean_degree, 2),
                                      bw.vpw_factor(deg[j], deg[i], g.mean_degree, 2))


def test_scaling_covariance(small_blobs):
    s = 3.7
    g1 = build_knn_graph(small_blobs, 5)
    g2 = build_knn_graph(DataMatrix(small_blobs.points * s), 5)
    assert bw.fpw_mean(g2).global_ == pytest.approx(s * bw.fpw_mean(g1).global_, rel=1e-12)
    np.testing.assert_allclose(bw.k7_local(g2, 3).per_point, s * bw.k7_local(g1, 3).per_point, rtol=1e-12)
    np.testing.assert_allclose(bw.mmm_local(g2).per_point, s * bw.mmm_local(g1).per_point, rtol=1e-12)
    np.testing.assert_array_equal(bw.vpw_edge(g2, 2).per_edge, bw.vpw_edge(g1, 2).per_edge)


def test_estimates_strictly_positive(small_blobs):
    g = build_knn_graph(small_blobs, 5)
    for spec in ("user:0.3", "mean", "silverman", "k:3", "mmm", "ea:3", "vpw"):
        est = bw.estimate(spec, g, small_blobs)
        vals = [v for v in (est.global_, est.per_point, est.per_edge) if v is not None][0]
        assert np.all(np.asarray(vals) > 0)


@pytest.mark.parametrize("spec", ["foo", "user", "mean:3", "k:x"])
def test_bad_specs(spec):
    with pytest.raises(ValidationError):
        bw.parse_bandwidth_spec(spec)


def test_estimate_shape_invariant():
    with pytest.raises(ValidationError):
        bw.BandwidthEstimate(bw.BandwidthKind.VPW, global_=1.0)
    with pytest.raises(ValidationError):
        bw.BandwidthEstimate(bw.BandwidthKind.FPW_USER, global_=1.0, per_point=np.ones(2))
