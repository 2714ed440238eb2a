"""
Point clouds: loading, synthetic generators, PCA and labeled splits.
"""

from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataFormatError, ValidationError


@dataclass(frozen=True)
class DataMatrix:
    """n points in a D-dimensional ambient space, with optional integer labels."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValidationError(f"points must be a non-empty 2-D table, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("points contain non-finite entries")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (pts.shape[0],):
                raise ValidationError(
                    f"labels length {lab.shape} does not match n={pts.shape[0]}")
            if lab.size and not np.all(np.equal(np.mod(lab, 1), 0)):
                raise ValidationError("labels must be integers")
            object.__setattr__(self, "labels", lab.astype(np.int64))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def D(self) -> int:
        return self.points.shape[1]

    def subset(self, idx) -> "DataMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        labels = None if self.labels is None else self.labels[idx]
        return DataMatrix(self.points[idx], labels)


@dataclass(frozen=True)
class LabeledSplit:
    train_idx: np.ndarray
    test_idx: np.ndarray
    labeled_idx: np.ndarray

    @property
    def m(self) -> int:
        return int(self.labeled_idx.size)

    def unlabeled_idx(self) -> np.ndarray:
        return np.setdiff1d(self.train_idx, self.labeled_idx)


def substream(seed: int, name: str) -> int:
    """Independent integer seed for a named purpose ("split", "labels", "walks", ...)."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8"))])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def load_csv(path, has_labels: bool = False, header: bool = False) -> DataMatrix:
    """Read a comma-separated numeric table.

    With ``has_labels`` the last column is taken as integer class ids.
    Errors name the 1-based row and column of the offending cell.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc

    start = 1 if header else 0
    values, labels = [], []
    width = None
    for r, row in enumerate(rows[start:], start=start + 1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if width is None:
            width = len(row)
            if has_labels and width < 2:
                raise DataFormatError(f"row {r}: need at least one feature column plus a label")
        elif len(row) != width:
            raise DataFormatError(f"row {r}: expected {width} columns, found {len(row)}")
        feats = row[:-1] if has_labels else row
        parsed = []
        for c, cell in enumerate(feats, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(f"row {r}, column {c}: non-numeric cell {cell!r}") from None
            if not np.isfinite(v):
                raise DataFormatError(f"row {r}, column {c}: non-finite value {cell!r}")
            parsed.append(v)
        values.append(parsed)
        if has_labels:
            cell = row[-1].strip()
            try:
                lab = float(cell)
            except ValueError:
                lab = float("nan")
            if not np.isfinite(lab) or lab != int(lab):
                raise DataFormatError(f"row {r}, column {width}: label {cell!r} is not an integer")
            labels.append(int(lab))

    if not values:
        raise DataFormatError(f"{path}: no data rows")
    return DataMatrix(np.array(values, dtype=float), np.array(labels) if has_labels else None)


def save_csv(data: DataMatrix, path) -> None:
    """Write points (and labels as the last column) with 17 significant digits."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for i in range(data.n):
            row = [format(v, ".17g") for v in data.points[i]]
            if data.labels is not None:
                row.append(str(int(data.labels[i])))
            w.writerow(row)


def gen_toroidal_helix(n: int = 2095, coils: int = 8, noise_sd: float = 0.0,
                       seed: int = 0) -> DataMatrix:
    """Sample a helix wound around a torus with radii (2, 1).

    x(t) = ((2 + cos(coils t)) cos t, (2 + cos(coils t)) sin t, sin(coils t)),
    t ~ U[0, 2pi), plus isotropic Gaussian noise.
    """
    if n < 3:
        raise ValidationError("helix needs n >= 3")
    if coils < 1:
        raise ValidationError("helix needs coils >= 1")
    if noise_sd < 0:
        raise ValidationError("noise_sd must be non-negative")
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, 2 * np.pi, size=n)
    ring = 2.0 + np.cos(coils * t)
    pts = np.column_stack([ring * np.cos(t), ring * np.sin(t), np.sin(coils * t)])
    if noise_sd > 0:
        pts = pts + rng.normal(scale=noise_sd, size=pts.shape)
    return DataMatrix(pts)


def gen_uneven_blobs(centers: Sequence[Sequence[float]], counts: Sequence[int],
                     sds: Sequence[float], seed: int = 0) -> DataMatrix:
    """Isotropic Gaussian blobs of different sizes and spreads, labeled by blob index."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if not (len(centers) == len(counts) == len(sds)):
        raise ValidationError("centers, counts and sds must have equal length")
    if len(centers) < 2:
        raise ValidationError("need at least two blobs")
    if any(int(c) < 1 for c in counts):
        raise ValidationError("counts must be >= 1")
    if any(not s > 0 for s in sds):
        raise ValidationError("sd must be positive")
    rng = np.random.default_rng(seed)
    pts, labels = [], []
    for idx, (c, cnt, sd) in enumerate(zip(centers, counts, sds)):
        pts.append(c + rng.normal(scale=sd, size=(int(cnt), centers.shape[1])))
        labels.append(np.full(int(cnt), idx))
    return DataMatrix(np.vstack(pts), np.concatenate(labels))


def pca_reduce(data: DataMatrix, k: int):
    """Project centered data onto its top-k principal directions.

    Returns ``(reduced, explained_variance_ratio)``; ratios are relative to the
    total variance and non-increasing.
    """
    if not 1 <= k <= min(data.n, data.D):
        raise ValidationError(f"k={k} outside [1, min(n, D)={min(data.n, data.D)}]")
    X = data.points - data.points.mean(axis=0)
    _, s, vt = np.linalg.svd(X, full_matrices=False)
    var = s ** 2
    total = var.sum()
    ratios = var[:k] / total if total > 0 else np.zeros(k)
    return DataMatrix(X @ vt[:k].T, data.labels), ratios


def _check_labels(data: DataMatrix):
    if data.labels is None:
        raise ValidationError("split requires labels")


def draw_labeled(labels: np.ndarray, train_idx: np.ndarray, m_per_class: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Pick ``m_per_class`` labeled indices per class among ``train_idx``."""
    picked = []
    for cls in np.unique(labels[train_idx]):
        members = train_idx[labels[train_idx] == cls]
        if members.size < m_per_class:
            raise ValidationError(
                f"class {cls} has {members.size} training points, fewer than m_per_class={m_per_class}")
        picked.append(rng.choice(members, size=m_per_class, replace=False))
    return np.sort(np.concatenate(picked)) if picked else np.empty(0, dtype=np.int64)


def make_split(data: DataMatrix, test_fraction: float, m_per_class: int,
               seed: int) -> LabeledSplit:
    """Stratified train/test split plus ``m_per_class`` labeled training points per class."""
    _check_labels(data)
    if not 0 <= test_fraction < 1:
        raise ValidationError("test_fraction must be in [0, 1)")
    if m_per_class < 1:
        raise ValidationError("m_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(data.labels):
        members = np.flatnonzero(data.labels == cls)
        members = rng.permutation(members)
        n_test = int(round(test_fraction * members.size))
        test.append(members[:n_test])
        train.append(members[n_test:])
    train_idx = np.sort(np.concatenate(train))
    test_idx = np.sort(np.concatenate(test))
    labeled = draw_labeled(data.labels, train_idx, m_per_class, rng)
    return LabeledSplit(train_idx, test_idx, labeled)
