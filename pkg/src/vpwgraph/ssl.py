"""
Laplacian-regularized least squares classification (LapRLSC).

The coefficients solve

    (K_m K_m^T + lambda_A K + lambda_I K L K) alpha = K_m y_m

where K is the n x n RBF Gram matrix of the training rows and K_m its
columns at the labeled indices; predictions are f(x) = sum_i alpha_i k(x_i, x).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import affinity as aff
from . import bandwidth as bwm
from .dataset import DataMatrix, draw_labeled, make_split, substream
from .errors import NumericError, ValidationError
from .neighborhood import build_knn_graph, neighborhood_stats, pairwise_sqdist

JITTER = 1e-10


@dataclass(frozen=True)
class KernelSpec:
    width: float

    def __post_init__(self):
        if not (np.isfinite(self.width) and self.width > 0):
            raise ValidationError(f"kernel width must be positive, got {self.width}")


@dataclass(frozen=True)
class LapRlscModel:
    alpha: np.ndarray
    train_points: np.ndarray
    kernel: KernelSpec
    lambda_a: float
    lambda_i: float


def gram(points_a, points_b, kernel: KernelSpec) -> np.ndarray:
    A = np.atleast_2d(np.asarray(points_a, float))
    B = np.atleast_2d(np.asarray(points_b, float))
    if A.shape[1] != B.shape[1]:
        raise ValidationError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    return np.exp(-pairwise_sqdist(A, B) / (2.0 * kernel.width ** 2))


def fit(train: DataMatrix, labeled_idx, y, L, kernel: KernelSpec,
        lambda_a: float, lambda_i: float) -> LapRlscModel:
    """Closed-form LapRLSC coefficients for +/-1 labels ``y`` on ``labeled_idx``."""
    labeled_idx = np.asarray(labeled_idx, dtype=np.int64)
    y = np.asarray(y, dtype=float)
    n = train.n
    if labeled_idx.size < 1:
        raise ValidationError("need at least one labeled point")
    if y.shape[0] != labeled_idx.size:
        raise ValidationError("one label per labeled index required")
    if L.shape != (n, n):
        raise ValidationError(f"Laplacian is {L.shape}, expected ({n}, {n})")
    if not lambda_a > 0:
        raise ValidationError("lambda_a must be positive")
    if lambda_i < 0:
        raise ValidationError("lambda_i must be non-negative")

    K = gram(train.points, train.points, kernel)
    Km = K[:, labeled_idx]
    A = Km @ Km.T + lambda_a * K
    if lambda_i:
        LK = L @ K if sp.issparse(L) else np.asarray(L) @ K
        A += lambda_i * (K @ LK)
    A = 0.5 * (A + A.T)
    A[np.diag_indices(n)] += JITTER * np.trace(A)
    rhs = Km @ y
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            alpha = scipy.linalg.solve(A, rhs, assume_a="sym")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"LapRLSC system is singular (cond ~ {np.linalg.cond(A):.3g}): {exc}") from None
    if not np.all(np.isfinite(alpha)):
        raise NumericError(f"LapRLSC produced non-finite coefficients (cond ~ {np.linalg.cond(A):.3g})")
    return LapRlscModel(alpha=alpha, train_points=train.points.copy(), kernel=kernel,
                        lambda_a=float(lambda_a), lambda_i=float(lambda_i))


def decision_function(model: LapRlscModel, query_points) -> np.ndarray:
    return gram(query_points, model.train_points, model.kernel) @ model.alpha


def predict(model: LapRlscModel, query_points):
    """Return ``(f, classes)``; classes are sign(f) with f == 0 mapped to +1."""
    f = decision_function(model, query_points)
    return f, np.where(f >= 0, 1, -1)


@dataclass(frozen=True)
class PipelineConfig:
    """Graph and solver settings for one classification pipeline."""

    k: int = 8
    bandwidth: str = "vpw"
    adjust: str = "none"
    exponent: str = "squared"
    lambda_a: float = 1e-4
    lambda_i: float = 1e-2
    gamma: Optional[float] = None
    ea_support: str = "graph"


def build_laplacian(data: DataMatrix, cfg: PipelineConfig):
    """Graph -> bandwidth -> affinity -> Laplacian for one point set."""
    graph = build_knn_graph(data, cfg.k)
    stats = neighborhood_stats(graph, data)
    bw = bwm.estimate(cfg.bandwidth, graph, data, ea_support=cfg.ea_support)
    W = aff.build_affinity(graph, stats, bw, aff.AdjustmentKind(cfg.adjust), aff.ExponentForm(cfg.exponent))
    return graph, W, aff.laplacian(W)


@dataclass
class PairResult:
    classes: tuple
    unlabeled_errors: list = field(default_factory=list)
    test_errors: list = field(default_factory=list)

    @property
    def name(self) -> str:
        return f"{self.classes[0]}-{self.classes[1]}"

    def summary(self):
        u = np.asarray(self.unlabeled_errors, float)
        t = np.asarray(self.test_errors, float)
        t_mean = float(t.mean()) if t.size and np.all(np.isfinite(t)) else float("nan")
        t_sd = float(t.std()) if t.size and np.all(np.isfinite(t)) else float("nan")
        return float(u.mean()), float(u.std()), t_mean, t_sd


def _error_pct(pred, truth) -> float:
    if truth.size == 0:
        return float("nan")
    return 100.0 * float(np.mean(pred != truth))


def evaluate_pairwise(data: DataMatrix, cfg: PipelineConfig, *, test_fraction: float = 0.5,
                      m_per_class: int = 2, repeats: int = 20, seed: int = 0):
    """One-vs-one LapRLSC over every class pair.

    For each pair the train/test split is drawn once; each repeat draws a
    fresh set of labeled points. Errors are percentages on the unlabeled
    training points and on the held-out test points.
    """
    if data.labels is None:
        raise ValidationError("pairwise evaluation needs labels")
    classes = np.unique(data.labels)
    if classes.size < 2:
        raise ValidationError("need at least two classes")
    if repeats < 1:
        raise ValidationError("repeats must be >= 1")

    results = []
    for c1, c2 in itertools.combinations(classes.tolist(), 2):
        members = np.flatnonzero(np.isin(data.labels, [c1, c2]))
        sub = data.subset(members)
        pair_split = make_split(sub, test_fraction, m_per_class, substream(seed, f"split/{c1}-{c2}"))
        train = sub.subset(pair_split.train_idx)
        test = sub.subset(pair_split.test_idx) if pair_split.test_idx.size else None
        graph, _, L = build_laplacian(train, cfg)
        width = cfg.gamma if cfg.gamma is not None else bwm.fpw_mean(graph).global_
        kernel = KernelSpec(width)

        y_train = np.where(train.labels == c1, 1, -1)
        all_train = np.arange(train.n)
        rng = np.random.default_rng(substream(seed, f"labels/{c1}-{c2}"))
        res = PairResult((c1, c2))
        for _ in range(repeats):
            labeled = draw_labeled(train.labels, all_train, m_per_class, rng)
            model = fit(train, labeled, y_train[labeled], L, kernel, cfg.lambda_a, cfg.lambda_i)
            unl = np.setdiff1d(all_train, labeled)
            _, pred_unl = predict(model, train.points[unl])
            res.unlabeled_errors.append(_error_pct(pred_unl, y_train[unl]))
            if test is not None:
                _, pred_test = predict(model, test.points)
                res.test_errors.append(_error_pct(pred_test, np.where(test.labels == c1, 1, -1)))
            else:
                res.test_errors.append(float("nan"))
        results.append(res)
    return results


ERROR_TABLE_HEADER = "pair,mean_err_unlabeled,sd_unlabeled,mean_err_test,sd_test"


def error_table_csv(results) -> str:
    lines = [ERROR_TABLE_HEADER]
    for r in results:
        vals = ",".join(format(v, ".17g") for v in r.summary())
        lines.append(f"{r.name},{vals}")
    return "\n".join(lines) + "\n"


def format_mean_sd(mean: float, sd: float) -> str:
    """Table cell ``mean (sd)``, e.g. ``12.34 (1.05)``."""
    return f"{mean:.2f} ({sd:.2f})"
