"""
Affinity matrices and the unnormalized graph Laplacian.

Edges are weighted either by a Gaussian heat kernel with a global or
per-point window, or by the variable Parzen window with an optional
neighbourhood adjustment term (non-local means gap, centroid gap,
Bhattacharyya distance) multiplied in.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .bandwidth import BandwidthEstimate, BandwidthKind
from .errors import ValidationError
from .neighborhood import NeighborGraph, NeighborhoodStats

# Smallest weight stored for an edge; keeps underflowed edges structurally present.
AFFINITY_FLOOR = np.finfo(float).tiny


class AdjustmentKind(str, enum.Enum):
    NONE = "none"
    NONLOCAL_B = "b"
    CENTROID_C = "c"
    BHATTACHARYYA_BD = "bd"


ADJUSTMENTS = (AdjustmentKind.NONLOCAL_B, AdjustmentKind.CENTROID_C, AdjustmentKind.BHATTACHARYYA_BD)


class ExponentForm(str, enum.Enum):
    """How the VPW factor enters the kernel.

    SQUARED: exp(-|x_i-x_j|^2 / eps^2) * exp(-gap^2 / eps^2)   (default)
    LITERAL: numerators raised once more (e_ij^2 with e_ij already squared;
             b/c gaps to the fourth power, bd squared as written)
    EQ4:     exp(-(|x_i-x_j|^2 + gap^2) / eps)
    """

    SQUARED = "squared"
    LITERAL = "literal"
    EQ4 = "eq4"


def bhattacharyya_distance(nu_i, delta_sq_i, nu_j, delta_sq_j):
    """Bhattacharyya distance between two 1-D Gaussians given mean and variance."""
    nu_i, nu_j = np.asarray(nu_i, float), np.asarray(nu_j, float)
    vi, vj = np.asarray(delta_sq_i, float), np.asarray(delta_sq_j, float)
    ratio_term = 0.25 * np.log(0.25 * (vi / vj + vj / vi + 2.0))
    mean_term = 0.25 * (nu_i - nu_j) ** 2 / (vi + vj)
    return ratio_term + mean_term


def adjustment_gap(stats: NeighborhoodStats, kind: AdjustmentKind, i, j) -> np.ndarray:
    """The per-pair adjustment value: |b_i-b_j|, |c_i-c_j| or bd_ij."""
    i = np.asarray(i)
    j = np.asarray(j)
    if kind is AdjustmentKind.NONE:
        return np.zeros(np.broadcast(i, j).shape)
    if kind is AdjustmentKind.NONLOCAL_B:
        return np.abs(stats.b[i] - stats.b[j])
    if kind is AdjustmentKind.CENTROID_C:
        return np.linalg.norm(stats.c[i] - stats.c[j], axis=-1)
    return bhattacharyya_distance(stats.nu[i], stats.delta_sq[i], stats.nu[j], stats.delta_sq[j])


def base_affinity(e_sq, bw):
    """Gaussian heat kernel exp(-e / (2 bw^2)) with unit normalizing constant."""
    bw = np.asarray(bw, float)
    return np.exp(-np.asarray(e_sq, float) / (2.0 * bw * bw))


def local_scaling_affinity(e_sq, sigma_i, sigma_j):
    """Self-tuning kernel exp(-e / (sigma_i sigma_j))."""
    return np.exp(-np.asarray(e_sq, float) / (np.asarray(sigma_i, float) * np.asarray(sigma_j, float)))


def adjusted_affinity(e_sq, adj_value, eps_ij, form: ExponentForm = ExponentForm.SQUARED,
                      kind: AdjustmentKind = AdjustmentKind.NONLOCAL_B):
    """VPW affinity: distance term times adjustment term, both in (0, 1]."""
    e_sq = np.asarray(e_sq, float)
    adj = np.asarray(adj_value, float)
    eps = np.asarray(eps_ij, float)
    if form is ExponentForm.EQ4:
        return np.exp(-e_sq / eps) * np.exp(-adj * adj / eps)
    if form is ExponentForm.LITERAL:
        e_term = e_sq * e_sq
        adj_term = adj * adj if kind is AdjustmentKind.BHATTACHARYYA_BD else (adj * adj) ** 2
    else:
        e_term = e_sq
        adj_term = adj * adj
    eps2 = eps * eps
    return np.exp(-e_term / eps2) * np.exp(-adj_term / eps2)


@dataclass(frozen=True)
class AffinityMatrix:
    """Sparse symmetric weights on graph edges; ``degree`` is the row sum."""

    W: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def degree(self) -> np.ndarray:
        return np.asarray(self.W.sum(axis=1)).ravel()

    def edges(self):
        """``(i, j, a_ij)`` for i < j."""
        coo = sp.triu(self.W, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def to_dense(self) -> np.ndarray:
        return self.W.toarray()


def _edge_weights(graph, stats, bw, adj, form):
    i, j, e = graph.edges()
    kind = bw.kind
    if adj is not AdjustmentKind.NONE and kind is not BandwidthKind.VPW:
        raise ValidationError(
            f"adjustment {adj.value!r} is defined on the variable Parzen window only (got {kind.value!r})")
    if kind.is_global:
        return i, j, base_affinity(e, bw.global_)
    if kind is BandwidthKind.K_LOCAL:
        return i, j, local_scaling_affinity(e, bw.per_point[i], bw.per_point[j])
    if kind is BandwidthKind.MMM:
        return i, j, base_affinity(e, np.sqrt(bw.per_point[i] * bw.per_point[j]))
    if kind is BandwidthKind.EA:
        beta = bw.beta
        p_ji = np.exp(-beta[i] * e - bw.log_norm[i])
        p_ij = np.exp(-beta[j] * e - bw.log_norm[j])
        return i, j, np.minimum(0.5 * (p_ji + p_ij), 1.0)
    gap = adjustment_gap(stats, adj, i, j)
    return i, j, adjusted_affinity(e, gap, bw.per_edge, form, adj)


def build_affinity(graph: NeighborGraph, stats: NeighborhoodStats, bw: BandwidthEstimate,
                   adj: AdjustmentKind = AdjustmentKind.NONE,
                   form: ExponentForm = ExponentForm.SQUARED) -> AffinityMatrix:
    """Weight every edge of ``graph`` and assemble the symmetric matrix W."""
    adj = AdjustmentKind(adj)
    form = ExponentForm(form)
    if stats.b.shape[0] != graph.n:
        raise ValidationError("graph and neighbourhood statistics disagree on n")
    if bw.per_point is not None and bw.per_point.shape[0] != graph.n:
        raise ValidationError("per-point bandwidth length does not match the graph")
    i, j, a = _edge_weights(graph, stats, bw, adj, form)
    if bw.per_edge is not None and bw.per_edge.shape[0] != i.shape[0]:
        raise ValidationError("per-edge bandwidth does not match the graph's edge list")
    a = np.clip(a, AFFINITY_FLOOR, 1.0)
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    W = sp.csr_matrix((np.concatenate([a, a]), (rows, cols)), shape=(graph.n, graph.n))
    W.sort_indices()
    if np.any(np.diff(W.indptr) == 0):
        raise ValidationError("isolated vertex in affinity graph")
    return AffinityMatrix(W)


def laplacian(W: AffinityMatrix) -> sp.csr_matrix:
    """Unnormalized Laplacian L = Lambda - W."""
    L = sp.diags(W.degree) - W.W
    return sp.csr_matrix(L)


def write_affinity_dump(W: AffinityMatrix, path) -> None:
    i, j, a = W.edges()
    with open(path, "w", encoding="utf-8") as fh:
        for p, q, v in zip(i, j, a):
            fh.write(f"{p} {q} {v:.17g}\n")
