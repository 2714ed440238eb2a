"""
Experiment configuration: a versioned JSON document and its validation.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from .affinity import AdjustmentKind, ExponentForm
from .bandwidth import BandwidthKind, parse_bandwidth_spec
from .dataset import substream  # noqa: F401  (re-exported)
from .errors import DataFormatError, ValidationError

SCHEMA_VERSION = 1
TASKS = ("generate", "embed", "classify", "diagnose")
GENERATORS = ("toroidal_helix", "uneven_blobs")


@dataclass
class ExperimentConfig:
    seed: int
    task: str = "embed"
    dataset: dict = field(default_factory=lambda: {"generator": "toroidal_helix", "params": {}})
    k: int = 10
    bandwidth: str = "vpw"
    adjust: str = "none"
    exponent: str = "squared"
    ea_support: str = "graph"
    compare: List[str] = field(default_factory=list)
    d_out: int = 2
    n_eigs: int = 10
    lambda_a: float = 1e-4
    lambda_i: float = 1e-2
    gamma: Optional[float] = None
    labels_per_class: int = 2
    test_fraction: float = 0.5
    repeats: int = 20
    steps: int = 100
    walks: int = 1000
    output_dir: str = "out"
    figures: bool = True
    schema: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ValidationError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}")
        if "seed" not in raw:
            raise ValidationError("config requires a seed")
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataFormatError(f"cannot read config {path}: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def validate(self) -> None:
        """Checks that need no data; ``k <= n - 1`` is checked once data is loaded."""
        if self.schema != SCHEMA_VERSION:
            raise ValidationError(f"unsupported config schema {self.schema}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")
        if self.task not in TASKS:
            raise ValidationError(f"task must be one of {TASKS}")
        self._validate_dataset()
        _int_at_least("k", self.k, 1)
        for spec in [self.pipeline_label()] + list(self.compare):
            bw, adj = split_estimator(spec)
            check_estimator(bw, adj)
        try:
            ExponentForm(self.exponent)
        except ValueError:
            raise ValidationError(f"exponent must be one of {[e.value for e in ExponentForm]}") from None
        if self.ea_support not in ("graph", "complete"):
            raise ValidationError("ea_support must be 'graph' or 'complete'")
        _int_at_least("d_out", self.d_out, 1)
        _int_at_least("n_eigs", self.n_eigs, 1)
        if not (isinstance(self.lambda_a, (int, float)) and self.lambda_a > 0):
            raise ValidationError("lambda_a must be positive")
        if not (isinstance(self.lambda_i, (int, float)) and self.lambda_i >= 0):
            raise ValidationError("lambda_i must be non-negative")
        if self.gamma is not None and not (isinstance(self.gamma, (int, float)) and self.gamma > 0):
            raise ValidationError("gamma must be positive")
        _int_at_least("labels_per_class", self.labels_per_class, 1)
        if not (isinstance(self.test_fraction, (int, float)) and 0 <= self.test_fraction < 1):
            raise ValidationError("test_fraction must be in [0, 1)")
        _int_at_least("repeats", self.repeats, 1)
        _int_at_least("steps", self.steps, 1)
        _int_at_least("walks", self.walks, 1)

    def _validate_dataset(self):
        ds = self.dataset
        if not isinstance(ds, dict):
            raise ValidationError("dataset must be an object")
        if "csv" in ds:
            allowed = {"csv", "has_labels", "header", "pca"}
        elif "generator" in ds:
            if ds["generator"] not in GENERATORS:
                raise ValidationError(f"dataset.generator must be one of {GENERATORS}")
            allowed = {"generator", "params", "pca"}
        else:
            raise ValidationError("dataset needs either 'csv' or 'generator'")
        extra = sorted(set(ds) - allowed)
        if extra:
            raise ValidationError(f"unknown dataset keys: {extra}")
        if "pca" in ds and ds["pca"] is not None:
            _int_at_least("dataset.pca", ds["pca"], 1)

    def pipeline_label(self) -> str:
        return self.bandwidth if self.adjust == "none" else f"{self.bandwidth}/{self.adjust}"


def _int_at_least(name, value, lo):
    if not isinstance(value, int) or isinstance(value, bool) or value < lo:
        raise ValidationError(f"{name} must be an integer >= {lo}, got {value!r}")


def split_estimator(label: str):
    """``"vpw/b"`` -> ("vpw", "b"); a bare bandwidth means no adjustment."""
    bw, _, adj = label.partition("/")
    return bw, adj or "none"


def check_estimator(bw: str, adj: str) -> None:
    kind, _ = parse_bandwidth_spec(bw)
    try:
        adj_kind = AdjustmentKind(adj)
    except ValueError:
        raise ValidationError(f"adjust must be one of {[a.value for a in AdjustmentKind]}") from None
    if adj_kind is not AdjustmentKind.NONE and kind is not BandwidthKind.VPW:
        raise ValidationError(f"adjustment {adj!r} requires the vpw bandwidth, got {bw!r}")
