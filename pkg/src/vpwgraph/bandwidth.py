"""
Parzen window (kernel bandwidth) estimators.

Global windows: user value, mean neighbour distance, Silverman's rule.
Per-point windows: k-th neighbour distance (self-tuning), min+max-mean (MMM),
entropic affinities at fixed perplexity (EA). Per-edge window: the variable
Parzen window, 2(D+2)|N0| / (|N_i| |N_j|), built from vertex degrees only.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import DataMatrix
from .errors import NumericError, ValidationError
from .neighborhood import NeighborGraph, pairwise_sqdist

WIDTH_FLOOR = 1e-12
EA_TOL = 1e-4
EA_MAX_ITER = 64
EA_LOG2_RANGE = 64.0


class BandwidthKind(str, enum.Enum):
    FPW_USER = "user"
    FPW_MEAN = "mean"
    FPW_SILVERMAN = "silverman"
    K_LOCAL = "k"
    MMM = "mmm"
    EA = "ea"
    VPW = "vpw"

    @property
    def is_global(self) -> bool:
        return self in (BandwidthKind.FPW_USER, BandwidthKind.FPW_MEAN, BandwidthKind.FPW_SILVERMAN)


@dataclass(frozen=True)
class BandwidthEstimate:
    """One bandwidth estimate; exactly one of the three storage slots is filled.

    ``per_edge`` is aligned with ``NeighborGraph.edges()``. For EA,
    ``per_point`` holds the widths 1/sqrt(2 beta_i); ``log_norm`` holds each
    point's log partition function and ``attained`` the reached perplexity.
    """

    kind: BandwidthKind
    global_: Optional[float] = None
    per_point: Optional[np.ndarray] = None
    per_edge: Optional[np.ndarray] = None
    log_norm: Optional[np.ndarray] = None
    attained: Optional[np.ndarray] = None
    support: str = "graph"

    def __post_init__(self):
        filled = [x is not None for x in (self.global_, self.per_point, self.per_edge)]
        if sum(filled) != 1:
            raise ValidationError("exactly one of global/per_point/per_edge must be set")
        expected = 0 if self.kind.is_global else (2 if self.kind is BandwidthKind.VPW else 1)
        if not filled[expected]:
            raise ValidationError(f"{self.kind.name} stores the wrong bandwidth shape")
        vals = np.atleast_1d(np.asarray(
            self.global_ if filled[0] else self.per_point if filled[1] else self.per_edge, dtype=float))
        if not (np.all(np.isfinite(vals)) and np.all(vals > 0)):
            raise ValidationError(f"{self.kind.name} bandwidth values must be positive and finite")

    @property
    def beta(self) -> np.ndarray:
        """EA precisions recovered from the stored widths."""
        return 1.0 / (2.0 * self.per_point ** 2)


def silverman_value(sigma: float, n: int) -> float:
    return float((4.0 * sigma ** 5 / (3.0 * n)) ** 0.2)


def fpw_silverman(data: DataMatrix) -> BandwidthEstimate:
    """Silverman's rule with sigma = sqrt(mean per-dimension variance)."""
    if data.n < 2:
        raise ValidationError("Silverman's rule needs n >= 2")
    sigma = float(np.sqrt(data.points.var(axis=0).mean()))
    if not sigma > 0:
        raise ValidationError("degenerate distribution: zero variance")
    return BandwidthEstimate(BandwidthKind.FPW_SILVERMAN, global_=silverman_value(sigma, data.n))


def fpw_mean(graph: NeighborGraph) -> BandwidthEstimate:
    """Mean over points of the mean Euclidean neighbour distance."""
    rows = graph.rows()
    b = np.bincount(rows, weights=np.sqrt(graph.sqdist), minlength=graph.n) / graph.degrees
    value = float(b.mean())
    return BandwidthEstimate(BandwidthKind.FPW_MEAN, global_=max(value, WIDTH_FLOOR))


def fpw_user(value: float) -> BandwidthEstimate:
    if not (np.isfinite(value) and value > 0):
        raise ValidationError(f"user bandwidth must be positive, got {value}")
    return BandwidthEstimate(BandwidthKind.FPW_USER, global_=float(value))


def _clamp(widths: np.ndarray, what: str) -> np.ndarray:
    bad = widths < WIDTH_FLOOR
    if np.any(bad):
        warnings.warn(f"{what}: {int(bad.sum())} zero-width neighbourhoods clamped to {WIDTH_FLOOR}",
                      RuntimeWarning, stacklevel=3)
    return np.maximum(widths, WIDTH_FLOOR)


def k7_local(graph: NeighborGraph, r: int = 7) -> BandwidthEstimate:
    """Distance to the r-th nearest neighbour (pre-symmetrization order)."""
    if r < 1:
        raise ValidationError("rank r must be >= 1")
    if r > graph.k:
        short = int(np.argmin(graph.degrees))
        raise ValidationError(
            f"rank r={r} exceeds the neighbour count of point {short} (k={graph.k})")
    sigma = np.sqrt(graph.knn_sqdist[:, r - 1])
    return BandwidthEstimate(BandwidthKind.K_LOCAL, per_point=_clamp(sigma, "k_local"))


def mmm_local(graph: NeighborGraph) -> BandwidthEstimate:
    """min + max - mean of each point's Euclidean edge lengths."""
    rows = graph.rows()
    dist = np.sqrt(graph.sqdist)
    lo = np.full(graph.n, np.inf)
    hi = np.full(graph.n, -np.inf)
    np.minimum.at(lo, rows, dist)
    np.maximum.at(hi, rows, dist)
    mean = np.bincount(rows, weights=dist, minlength=graph.n) / graph.degrees
    return BandwidthEstimate(BandwidthKind.MMM, per_point=_clamp(lo + hi - mean, "mmm"))


def _entropy_bits(e: np.ndarray, beta: float):
    """Entropy (bits) and log partition function of p_j ∝ exp(-beta e_j); e shifted to min 0."""
    logits = -beta * e
    top = logits.max()
    w = np.exp(logits - top)
    z = w.sum()
    p = w / z
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.sum(np.where(p > 0, p * np.log2(p), 0.0))
    return h, np.log(z) + top


def perplexity_search(e: np.ndarray, perplexity: float):
    """Find beta with 2**H(p_beta) == perplexity for one neighbourhood.

    Bisection on log2(beta) over [-64, 64] starting at beta = 1; each step
    doubles or halves the bracket. Returns ``(beta, attained, log_norm)``
    where ``log_norm`` is relative to the unshifted distances.
    """
    e = np.asarray(e, dtype=float)
    shift = e.min()
    es = e - shift
    lo, hi = -EA_LOG2_RANGE, EA_LOG2_RANGE
    t = 0.0
    attained = np.nan
    for _ in range(EA_MAX_ITER):
        beta = 2.0 ** t
        h, logz = _entropy_bits(es, beta)
        attained = 2.0 ** h
        if abs(attained - perplexity) <= EA_TOL:
            return beta, attained, logz - beta * shift
        if attained > perplexity:
            lo = t  # too flat: sharpen
        else:
            hi = t
        t = 0.5 * (lo + hi)
    raise NumericError(
        f"perplexity {perplexity} unreachable: attained {attained:.6g} after {EA_MAX_ITER} iterations")


def ea_perplexity(graph: NeighborGraph, perplexity: Optional[float] = None,
                  support: str = "graph", data: Optional[DataMatrix] = None) -> BandwidthEstimate:
    """Entropic affinities: per-point precision matching a target perplexity.

    ``support="graph"`` restricts each conditional distribution to graph
    neighbours; ``support="complete"`` uses every other point (needs ``data``).
    Default perplexity is k - 1.
    """
    if perplexity is None:
        perplexity = graph.k - 1
    if support not in ("graph", "complete"):
        raise ValidationError(f"unknown EA support {support!r}")
    cap = graph.degrees.max() if support == "graph" else graph.n - 1
    if not 1 < perplexity < cap + 1:
        raise ValidationError(f"perplexity {perplexity} must lie in (1, {cap + 1})")
    if support == "complete" and data is None:
        raise ValidationError("complete EA support requires the data matrix")

    beta = np.empty(graph.n)
    attained = np.empty(graph.n)
    log_norm = np.empty(graph.n)
    for i in range(graph.n):
        if support == "graph":
            _, e = graph.neighbors(i)
        else:
            e = np.delete(pairwise_sqdist(data.points[i:i + 1], data.points)[0], i)
        try:
            beta[i], attained[i], log_norm[i] = perplexity_search(e, perplexity)
        except NumericError as exc:
            raise NumericError(f"point {i}: {exc}") from None
    width = 1.0 / np.sqrt(2.0 * beta)
    return BandwidthEstimate(BandwidthKind.EA, per_point=width, log_norm=log_norm,
                             attained=attained, support=support)


def vpw_factor(deg_i, deg_j, mean_degree: float, D: int):
    return 2.0 * (D + 2) * mean_degree / (np.asarray(deg_i, float) * np.asarray(deg_j, float))


def vpw_edge(graph: NeighborGraph, D: int) -> BandwidthEstimate:
    """Variable Parzen window on every edge from the endpoint degrees."""
    if D < 1:
        raise ValidationError("ambient dimension D must be >= 1")
    deg = graph.degrees
    if np.any(deg < 1):
        raise ValidationError("VPW needs every vertex to have at least one neighbour")
    i, j, _ = graph.edges()
    eps = vpw_factor(deg[i], deg[j], graph.mean_degree, D)
    return BandwidthEstimate(BandwidthKind.VPW, per_edge=eps)


def parse_bandwidth_spec(spec: str):
    """Split a ``--bandwidth`` token into (kind, parameter or None)."""
    name, _, arg = spec.strip().partition(":")
    try:
        kind = BandwidthKind(name)
    except ValueError:
        raise ValidationError(
            f"unknown bandwidth {spec!r}; expected user:<v>|mean|silverman|k:<r>|mmm|ea:<perp>|vpw") from None
    if kind is BandwidthKind.FPW_USER and not arg:
        raise ValidationError("user bandwidth needs a value, e.g. user:0.5")
    if arg and kind not in (BandwidthKind.FPW_USER, BandwidthKind.K_LOCAL, BandwidthKind.EA):
        raise ValidationError(f"bandwidth {name!r} takes no parameter")
    value = None
    if arg:
        try:
            value = int(arg) if kind is BandwidthKind.K_LOCAL else float(arg)
        except ValueError:
            raise ValidationError(f"bad parameter in bandwidth spec {spec!r}") from None
    return kind, value


def estimate(spec: str, graph: NeighborGraph, data: DataMatrix,
             ea_support: str = "graph") -> BandwidthEstimate:
    """Dispatch a bandwidth spec string to its estimator."""
    kind, value = parse_bandwidth_spec(spec)
    if kind is BandwidthKind.FPW_USER:
        return fpw_user(value)
    if kind is BandwidthKind.FPW_MEAN:
        return fpw_mean(graph)
    if kind is BandwidthKind.FPW_SILVERMAN:
        return fpw_silverman(data)
    if kind is BandwidthKind.K_LOCAL:
        return k7_local(graph, 7 if value is None else value)
    if kind is BandwidthKind.MMM:
        return mmm_local(graph)
    if kind is BandwidthKind.EA:
        return ea_perplexity(graph, value, support=ea_support, data=data)
    return vpw_edge(graph, data.D)
