import numpy as np
import pytest

from vpwgraph.dataset import (DataMatrix, gen_toroidal_helix, gen_uneven_blobs, load_csv,
                              make_split, pca_reduce, save_csv)
from vpwgraph.errors import DataFormatError, ValidationError


def test_load_csv_plain(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0,0\n1,0\n0,1\n")
    d = load_csv(p)
    assert (d.n, d.D) == (3, 2)
    assert d.labels is None


def test_load_csv_labels(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0,0\n1,0\n0,1\n")
    d = load_csv(p, has_labels=True)
    assert (d.n, d.D) == (3, 1)
    assert d.labels.tolist() == [0, 0, 1]


def test_load_csv_header(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x,y\n1,2\n")
    assert load_csv(p, header=True).points.tolist() == [[1.0, 2.0]]


@pytest.mark.parametrize("text, where", [
    ("a,b\n", "row 1"),
    ("1,2\n3\n", "row 2"),
    ("1,2\n3,x\n", "row 2, column 2"),
])
def test_load_csv_errors_name_position(tmp_path, text, where):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(DataFormatError, match=where):
        load_csv(p)


def test_load_csv_non_integer_label(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,0\n2,0.5\n")
    with pytest.raises(DataFormatError, match="row 2, column 2"):
        load_csv(p, has_labels=True)


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DataFormatError):
        load_csv(tmp_path / "nope.csv")


def test_save_load_roundtrip(tmp_path, small_blobs):
    p = tmp_path / "b.csv"
    save_csv(small_blobs, p)
    back = load_csv(p, has_labels=True)
    np.testing.assert_array_equal(back.points, small_blobs.points)
    np.testing.assert_array_equal(back.labels, small_blobs.labels)


def test_datamatrix_rejects_bad_labels():
    with pytest.raises(ValidationError):
        DataMatrix(np.zeros((3, 2)), labels=[0, 1])
    with pytest.raises(ValidationError):
        DataMatrix(np.array([[np.nan, 0.0]]))


def test_helix_count_and_torus_identity():
    d = gen_toroidal_helix(n=2095, coils=8, noise_sd=0.0, seed=0)
    assert (d.n, d.D) == (2095, 3)
    x, y, z = d.points.T
    np.testing.assert_allclose((np.hypot(x, y) - 2.0) ** 2 + z ** 2, 1.0, atol=1e-12)


def test_helix_deterministic():
    a = gen_toroidal_helix(n=100, seed=7, noise_sd=0.1)
    b = gen_toroidal_helix(n=100, seed=7, noise_sd=0.1)
    assert a.points.tobytes() == b.points.tobytes()


@pytest.mark.parametrize("kw", [dict(n=2), dict(coils=0), dict(noise_sd=-1.0)])
def test_helix_invalid(kw):
    with pytest.raises(ValidationError):
        gen_toroidal_helix(**kw)


def test_blobs_construction():
    d = gen_uneven_blobs([(0, 0), (10, 0)], [100, 10], [1, 1], seed=0)
    assert d.n == 110
    assert set(d.labels.tolist()) == {0, 1}
    # law of large numbers: sample mean of 100 N(0,1) points within 0.5 of the center
    assert np.linalg.norm(d.points[d.labels == 0].mean(axis=0)) < 0.5


def test_blobs_errors():
    with pytest.raises(ValidationError, match="sd must be positive"):
        gen_uneven_blobs([(0, 0), (10, 0)], [5, 5], [0, 0])
    with pytest.raises(ValidationError):
        gen_uneven_blobs([(0, 0), (10, 0)], [5], [1, 1])


def test_pca_collinear_rank_one():
    t = np.linspace(-1, 1, 20)
    d = DataMatrix(np.column_stack([t, 2 * t]))
    _, ratios = pca_reduce(d, 1)
    assert ratios[0] == pytest.approx(1.0, abs=1e-10)


def test_pca_full_rank_preserves_distances(rng):
    d = DataMatrix(rng.normal(size=(30, 4)))
    red, _ = pca_reduce(d, 4)
    def sq(P):
        return ((P[:, None, :] - P[None, :, :]) ** 2).sum(-1)
    np.testing.assert_allclose(sq(red.points), sq(d.points), atol=1e-8)


def test_pca_reconstruction_matches_covariance_eigendecomposition(rng):
    X = rng.normal(size=(50, 10))
    red, ratios = pca_reduce(DataMatrix(X), 10)
    Xc = X - X.mean(axis=0)
    # oracle: eigenvectors of the covariance matrix
    vals, vecs = np.linalg.eigh(Xc.T @ Xc)
    order = np.argsort(vals)[::-1]
    vecs = vecs[:, order]
    np.testing.assert_allclose(np.abs(red.points), np.abs(Xc @ vecs), atol=1e-8)
    # basis is orthonormal, so projecting back reconstructs the centered input
    basis = np.linalg.lstsq(red.points, Xc, rcond=None)[0]
    np.testing.assert_allclose(red.points @ basis, Xc, atol=1e-8)
    assert np.all(np.diff(ratios) <= 1e-15)
    np.testing.assert_allclose(ratios, vals[order] / vals.sum(), atol=1e-12)


def test_pca_columns_uncorrelated(rng):
    X = rng.normal(size=(80, 6)) @ rng.normal(size=(6, 6))
    red, _ = pca_reduce(DataMatrix(X), 4)
    C = np.cov(red.points.T)
    off = C - np.diag(np.diag(C))
    assert np.abs(off).max() < 1e-8 * np.trace(C)


def test_pca_k_out_of_range():
    with pytest.raises(ValidationError):
        pca_reduce(DataMatrix(np.zeros((3, 2))), 3)


def _two_class(n=100):
    return DataMatrix(np.arange(n, dtype=float)[:, None], labels=np.arange(n) % 2)


def test_split_arithmetic():
    s = make_split(_two_class(), test_fraction=0.5, m_per_class=2, seed=0)
    assert s.m == 4
    assert s.train_idx.size == 50
    assert not set(s.train_idx) & set(s.test_idx)
    assert set(s.labeled_idx) <= set(s.train_idx)


def test_split_class_too_small():
    with pytest.raises(ValidationError):
        make_split(_two_class(), test_fraction=0.5, m_per_class=40, seed=0)


def test_split_deterministic():
    a = make_split(_two_class(), 0.3, 3, seed=9)
    b = make_split(_two_class(), 0.3, 3, seed=9)
    for f in ("train_idx", "test_idx", "labeled_idx"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))
