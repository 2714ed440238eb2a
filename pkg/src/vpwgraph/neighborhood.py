"""
Exhaustive k-nearest-neighbour graph and per-neighbourhood statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DataMatrix
from .errors import ValidationError

DELTA_SQ_FLOOR = 1e-12

# Bytes of scratch space for one block of pairwise differences.
_BLOCK_BYTES = 32 * 2 ** 20


def pairwise_sqdist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances from explicit differences.

    Slower than the Gram-matrix expansion but exact enough that
    d(a, b) == d(b, a) bit for bit, which the tie-break relies on.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    out = np.empty((A.shape[0], B.shape[0]))
    step = max(1, _BLOCK_BYTES // (8 * max(1, B.shape[0] * A.shape[1])))
    for s in range(0, A.shape[0], step):
        diff = A[s:s + step, None, :] - B[None, :, :]
        out[s:s + step] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


@dataclass(frozen=True)
class NeighborGraph:
    """Union-symmetrized k-NN graph.

    Adjacency is stored CSR-style: the neighbours of ``i`` are
    ``indices[indptr[i]:indptr[i+1]]`` (sorted ascending) with squared edge
    lengths in ``sqdist``. ``knn_idx``/``knn_sqdist`` keep each point's own
    k nearest others in distance order, before symmetrization.
    """

    n: int
    k: int
    indptr: np.ndarray
    indices: np.ndarray
    sqdist: np.ndarray
    knn_idx: np.ndarray
    knn_sqdist: np.ndarray

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def mean_degree(self) -> float:
        return float(self.degrees.mean())

    def neighbors(self, i: int):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.sqdist[lo:hi]

    def rows(self) -> np.ndarray:
        """Row index of every stored (directed) adjacency entry."""
        return np.repeat(np.arange(self.n), self.degrees)

    def edges(self):
        """Undirected edge list ``(i, j, e_ij)`` with ``i < j``, ordered by (i, j)."""
        rows = self.rows()
        keep = rows < self.indices
        return rows[keep], self.indices[keep], self.sqdist[keep]


def build_knn_graph(data: DataMatrix, k: int) -> NeighborGraph:
    """k nearest others of every point by brute force, then symmetrize by union.

    Ties in distance are resolved in favour of the smaller index.
    """
    n = data.n
    if not 1 <= k <= n - 1:
        raise ValidationError(f"k={k} must satisfy 1 <= k <= n-1 = {n - 1}")
    X = data.points
    knn_idx = np.empty((n, k), dtype=np.int64)
    knn_sq = np.empty((n, k))
    step = max(1, _BLOCK_BYTES // (8 * max(1, n * X.shape[1])))
    for s in range(0, n, step):
        block = pairwise_sqdist(X[s:s + step], X)
        rows = np.arange(block.shape[0])
        block[rows, s + rows] = np.inf
        order = np.argsort(block, axis=1, kind="stable")[:, :k]
        knn_idx[s:s + step] = order
        knn_sq[s:s + step] = np.take_along_axis(block, order, axis=1)

    src = np.repeat(np.arange(n), k)
    dst = knn_idx.ravel()
    e = knn_sq.ravel()
    # union: keep each directed pair in both orientations, drop duplicates
    ii = np.concatenate([src, dst])
    jj = np.concatenate([dst, src])
    ee = np.concatenate([e, e])
    key = ii * n + jj
    _, first = np.unique(key, return_index=True)
    ii, jj, ee = ii[first], jj[first], ee[first]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(ii, minlength=n), out=indptr[1:])
    return NeighborGraph(n=n, k=k, indptr=indptr, indices=jj, sqdist=ee,
                         knn_idx=knn_idx, knn_sqdist=knn_sq)


@dataclass(frozen=True)
class NeighborhoodStats:
    """Per-point summaries of the neighbour set N(x_i).

    ``b`` is the mean Euclidean neighbour distance (also the Bhattacharyya
    mean ``nu``), ``delta_sq`` its population variance, ``c`` the centroid.
    """

    b: np.ndarray
    c: np.ndarray
    nu: np.ndarray
    delta_sq: np.ndarray


def neighborhood_stats(graph: NeighborGraph, data: DataMatrix) -> NeighborhoodStats:
    if graph.n != data.n:
        raise ValidationError(f"graph has n={graph.n} but data has n={data.n}")
    deg = graph.degrees.astype(float)
    rows = graph.rows()
    dist = np.sqrt(graph.sqdist)
    b = np.bincount(rows, weights=dist, minlength=graph.n) / deg
    dev = dist - b[rows]
    delta_sq = np.bincount(rows, weights=dev * dev, minlength=graph.n) / deg
    delta_sq = np.maximum(delta_sq, DELTA_SQ_FLOOR)
    c = np.zeros((graph.n, data.D))
    np.add.at(c, rows, data.points[graph.indices])
    c /= deg[:, None]
    return NeighborhoodStats(b=b, c=c, nu=b.copy(), delta_sq=delta_sq)


def write_graph_dump(graph: NeighborGraph, path) -> None:
    """Text dump, one ``i j e_ij`` line per undirected edge with i < j."""
    i, j, e = graph.edges()
    with open(path, "w", encoding="utf-8") as fh:
        for a, b_, v in zip(i, j, e):
            fh.write(f"{a} {b_} {v:.17g}\n")


def read_edge_dump(path):
    """Parse an ``i j value`` dump back into integer/float arrays."""
    rows = np.loadtxt(path, ndmin=2)
    if rows.size == 0:
        return np.empty(0, int), np.empty(0, int), np.empty(0)
    return rows[:, 0].astype(np.int64), rows[:, 1].astype(np.int64), rows[:, 2]
