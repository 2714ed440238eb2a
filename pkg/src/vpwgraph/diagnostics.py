"""
Choosing among the three affinity adjustments.

Two views: how long a random walk on the adjusted graph stays inside one
class (mean same-class run length), and pairwise statistics of the
adjustment gap itself (largest same-class gap, smallest cross-class gap,
mean gap).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Dict, Iterable

import numpy as np

from .affinity import ADJUSTMENTS, AdjustmentKind, AffinityMatrix, adjustment_gap
from .errors import ValidationError
from .neighborhood import NeighborhoodStats


@dataclass(frozen=True)
class WalkResult:
    mean_persistence: float
    visit_histogram: np.ndarray
    steps: int
    walks: int


@dataclass(frozen=True)
class ClusterDistances:
    max_intra: float
    min_inter: float
    mean_dist: float


def transition_cdf(W: AffinityMatrix):
    """Row-wise cumulative transition probabilities a_ij / Lambda_ii, offset by row index.

    Entry ``cdf[p]`` for a stored entry p of row i lies in (i, i + 1]; the last
    entry of each row is exactly i + 1, so ``searchsorted(cdf, i + u)`` with
    u in [0, 1) always lands inside row i.
    """
    Wc = W.W.tocsr()
    Wc.sort_indices()
    deg = np.diff(Wc.indptr)
    if np.any(deg == 0):
        raise ValidationError("random walk needs every vertex to have an edge")
    rows = np.repeat(np.arange(Wc.shape[0]), deg)
    prob = Wc.data / np.asarray(Wc.sum(axis=1)).ravel()[rows]
    cdf = np.empty_like(prob)
    for i in range(Wc.shape[0]):
        lo, hi = Wc.indptr[i], Wc.indptr[i + 1]
        cdf[lo:hi] = np.cumsum(prob[lo:hi])
        cdf[hi - 1] = 1.0
    return cdf + rows, Wc.indices, Wc.indptr


def random_walk_persistence(W: AffinityMatrix, labels, steps: int, walks: int,
                            seed: int = 0) -> WalkResult:
    """Simulate ``walks`` walks of ``steps`` transitions from uniform start nodes.

    Persistence is the pooled mean length (in nodes) of the maximal
    same-class runs along all walks. Visit counts exclude start nodes, so
    they sum to ``walks * steps``.
    """
    labels = np.asarray(labels)
    if labels.shape != (W.n,):
        raise ValidationError("one label per vertex required")
    if steps < 1 or walks < 1:
        raise ValidationError("steps and walks must be >= 1")
    cdf, targets, indptr = transition_cdf(W)
    rng = np.random.default_rng(seed)
    cur = rng.integers(0, W.n, size=walks)
    visits = np.zeros(W.n, dtype=np.int64)
    runs = np.full(walks, 1, dtype=np.int64)
    prev_lab = labels[cur]
    for _ in range(steps):
        u = rng.random(walks)
        pos = np.searchsorted(cdf, cur + u, side="right")
        pos = np.minimum(pos, indptr[cur + 1] - 1)  # cur + u may round up to cur + 1
        cur = targets[pos]
        np.add.at(visits, cur, 1)
        lab = labels[cur]
        runs += lab != prev_lab
        prev_lab = lab
    persistence = walks * (steps + 1) / runs.sum()
    return WalkResult(float(persistence), visits, steps, walks)


def cluster_distance_table(labels, stats: NeighborhoodStats,
                           adjustments: Iterable[AdjustmentKind] = ADJUSTMENTS,
                           block: int = 256) -> Dict[AdjustmentKind, ClusterDistances]:
    """Per adjustment: max same-class gap, min cross-class gap, mean gap over pairs i < j.

    A side with no pairs (e.g. singleton classes) reports 0.
    """
    labels = np.asarray(labels)
    if np.unique(labels).size < 2:
        raise ValidationError("cluster distances need at least two classes")
    n = labels.shape[0]
    cols = np.arange(n)
    out = {}
    for kind in adjustments:
        kind = AdjustmentKind(kind)
        hi, lo, total, count = -np.inf, np.inf, 0.0, 0
        for s in range(0, n, block):
            rows = np.arange(s, min(n, s + block))
            G = adjustment_gap(stats, kind, rows[:, None], cols[None, :])
            upper = cols[None, :] > rows[:, None]
            same = upper & (labels[rows][:, None] == labels[None, :])
            cross = upper & ~same
            if same.any():
                hi = max(hi, float(G[same].max()))
            if cross.any():
                lo = min(lo, float(G[cross].min()))
            total += float(G[upper].sum())
            count += int(upper.sum())
        out[kind] = ClusterDistances(
            max_intra=hi if np.isfinite(hi) else 0.0,
            min_inter=lo if np.isfinite(lo) else 0.0,
            mean_dist=total / count if count else 0.0,
        )
    return out


def _ranks(values, descending=False) -> np.ndarray:
    """Competition ranks starting at 1; equal values share the best rank."""
    v = -np.asarray(values, float) if descending else np.asarray(values, float)
    return np.array([1 + int(np.sum(v < x)) for x in v])


def select_adjustment(report: Dict[AdjustmentKind, ClusterDistances]) -> AdjustmentKind:
    """Lowest rank sum over: small max-intra, large min-inter, mean closest to the median mean.

    Ties go to the larger min-inter, then to the order b, c, bd.
    """
    missing = [k.value for k in ADJUSTMENTS if k not in report]
    if missing:
        raise ValidationError(f"report lacks adjustments: {missing}")
    kinds = list(ADJUSTMENTS)
    intra = [report[k].max_intra for k in kinds]
    inter = [report[k].min_inter for k in kinds]
    means = np.array([report[k].mean_dist for k in kinds])
    closeness = np.abs(means - np.median(means))
    total = _ranks(intra) + _ranks(inter, descending=True) + _ranks(closeness)
    order = sorted(range(3), key=lambda t: (total[t], -inter[t], t))
    return kinds[order[0]]


def cluster_table_csv(report: Dict[AdjustmentKind, ClusterDistances]) -> str:
    buf = io.StringIO()
    buf.write("adjustment,max_intra,min_inter,mean\n")
    for kind, row in report.items():
        buf.write(f"{kind.value},{row.max_intra:.17g},{row.min_inter:.17g},{row.mean_dist:.17g}\n")
    return buf.getvalue()


def walk_table_csv(results: Dict[AdjustmentKind, WalkResult]) -> str:
    buf = io.StringIO()
    buf.write("adjustment,mean_persistence,steps,walks\n")
    for kind, r in results.items():
        buf.write(f"{kind.value},{r.mean_persistence:.17g},{r.steps},{r.walks}\n")
    return buf.getvalue()


def visit_histogram_csv(results: Dict[AdjustmentKind, WalkResult]) -> str:
    kinds = list(results)
    buf = io.StringIO()
    buf.write("node," + ",".join(k.value for k in kinds) + "\n")
    n = len(next(iter(results.values())).visit_histogram) if results else 0
    for v in range(n):
        buf.write(f"{v}," + ",".join(str(int(results[k].visit_histogram[v])) for k in kinds) + "\n")
    return buf.getvalue()
