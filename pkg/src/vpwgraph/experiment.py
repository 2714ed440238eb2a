"""
Run one configured experiment end to end and write its artifacts.

All results are computed in memory first; files are only written once the
whole run has succeeded, so a failed run leaves the output directory alone.
"""

from __future__ import annotations

import hashlib
import io
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict

import numpy as np
import scipy

from . import __version__
from . import affinity as aff
from . import bandwidth as bwm
from . import dataset as ds
from . import diagnostics as dg
from . import figures
from . import spectral as spc
from . import ssl
from .config import ExperimentConfig, split_estimator, substream
from .errors import ValidationError
from .neighborhood import build_knn_graph, neighborhood_stats
from .svg import svg_scatter


@dataclass
class RunResult:
    files: Dict[str, bytes] = field(default_factory=dict)
    figures: Dict[str, Callable[[Path], None]] = field(default_factory=dict)
    stdout: str = ""


def load_dataset(cfg: ExperimentConfig) -> ds.DataMatrix:
    spec = cfg.dataset
    if "csv" in spec:
        path = Path(spec["csv"])
        data = ds.load_csv(path, has_labels=bool(spec.get("has_labels", False)),
                           header=bool(spec.get("header", False)))
    else:
        params = dict(spec.get("params", {}))
        params.setdefault("seed", substream(cfg.seed, "data"))
        try:
            if spec["generator"] == "toroidal_helix":
                data = ds.gen_toroidal_helix(**params)
            else:
                data = ds.gen_uneven_blobs(**params)
        except TypeError as exc:
            raise ValidationError(f"bad generator parameters: {exc}") from None
    if spec.get("pca"):
        data, _ = ds.pca_reduce(data, int(spec["pca"]))
    return data


def _check_against_data(cfg: ExperimentConfig, data: ds.DataMatrix) -> None:
    if not 1 <= cfg.k <= data.n - 1:
        raise ValidationError(f"k={cfg.k} must satisfy 1 <= k <= n-1 = {data.n - 1}")
    if cfg.task in ("classify", "diagnose") and data.labels is None:
        raise ValidationError(f"task {cfg.task!r} needs labeled data")
    if cfg.task == "embed" and cfg.n_eigs < cfg.d_out + 1:
        raise ValidationError("n_eigs must be at least d_out + 1")


def _csv_points(points: np.ndarray, labels=None) -> bytes:
    buf = io.StringIO()
    for i in range(points.shape[0]):
        row = [format(v, ".17g") for v in points[i]]
        if labels is not None:
            row.append(str(int(labels[i])))
        buf.write(",".join(row) + "\n")
    return buf.getvalue().encode("utf-8")


def _laplacian_for(label: str, cfg: ExperimentConfig, data, graph, stats):
    bw_spec, adj = split_estimator(label)
    bw = bwm.estimate(bw_spec, graph, data, ea_support=cfg.ea_support)
    W = aff.build_affinity(graph, stats, bw, aff.AdjustmentKind(adj), aff.ExponentForm(cfg.exponent))
    return W, aff.laplacian(W)


def _embed(cfg, data, res: RunResult):
    graph = build_knn_graph(data, cfg.k)
    stats = neighborhood_stats(graph, data)
    named = []
    n_eigs = min(cfg.n_eigs, data.n)
    for label in [cfg.pipeline_label()] + [c for c in cfg.compare if c != cfg.pipeline_label()]:
        _, L = _laplacian_for(label, cfg, data, graph, stats)
        named.append((label, spc.smallest_eigenpairs(L, n_eigs, seed=substream(cfg.seed, "eigs"))))
    emb = spc.eigenmap_embed(named[0][1], cfg.d_out).points
    res.files["embedding.csv"] = _csv_points(emb, data.labels)
    res.files["eigenvalues.csv"] = spc.eigenvalue_report(named, n_eigs).encode("utf-8")
    if cfg.d_out == 2:
        res.files["scatter.svg"] = svg_scatter(emb, data.labels).encode("utf-8")
        res.figures["embedding.png"] = lambda p: figures.plot_embedding(emb, data.labels, p, named[0][0])
    res.figures["eigenvalues.png"] = lambda p: figures.plot_eigenvalues(named, n_eigs, p)


def _classify(cfg, data, res: RunResult):
    bw_spec, adj = split_estimator(cfg.pipeline_label())
    pipe = ssl.PipelineConfig(k=cfg.k, bandwidth=bw_spec, adjust=adj, exponent=cfg.exponent,
                              lambda_a=cfg.lambda_a, lambda_i=cfg.lambda_i, gamma=cfg.gamma,
                              ea_support=cfg.ea_support)
    rows = ssl.evaluate_pairwise(data, pipe, test_fraction=cfg.test_fraction,
                                 m_per_class=cfg.labels_per_class, repeats=cfg.repeats,
                                 seed=substream(cfg.seed, "classify"))
    res.files["errors.csv"] = ssl.error_table_csv(rows).encode("utf-8")
    res.figures["errors.png"] = lambda p: figures.plot_error_table(rows, p)
    lines = [f"{r.name}: unlabeled {ssl.format_mean_sd(*r.summary()[:2])}  "
             f"test {ssl.format_mean_sd(*r.summary()[2:])}" for r in rows]
    res.stdout = "\n".join(lines) + "\n"


def _diagnose(cfg, data, res: RunResult):
    graph = build_knn_graph(data, cfg.k)
    stats = neighborhood_stats(graph, data)
    vpw = bwm.vpw_edge(graph, data.D)
    walks = {}
    for kind in aff.ADJUSTMENTS:
        W = aff.build_affinity(graph, stats, vpw, kind, aff.ExponentForm(cfg.exponent))
        walks[kind] = dg.random_walk_persistence(W, data.labels, cfg.steps, cfg.walks,
                                                 seed=substream(cfg.seed, "walks"))
    report = dg.cluster_distance_table(data.labels, stats)
    choice = dg.select_adjustment(report)
    res.files["cluster_distances.csv"] = dg.cluster_table_csv(report).encode("utf-8")
    res.files["walk_persistence.csv"] = dg.walk_table_csv(walks).encode("utf-8")
    res.files["visit_histogram.csv"] = dg.visit_histogram_csv(walks).encode("utf-8")
    res.figures["visits.png"] = lambda p: figures.plot_visits(data.points, walks, p)
    res.stdout = choice.value + "\n"


def _generate(cfg, data, res: RunResult):
    res.files["data.csv"] = _csv_points(data.points, data.labels)


TASK_RUNNERS = {"embed": _embed, "classify": _classify, "diagnose": _diagnose, "generate": _generate}


def compute(cfg: ExperimentConfig) -> RunResult:
    """Validate against the data and compute every artifact in memory."""
    cfg.validate()
    data = load_dataset(cfg)
    _check_against_data(cfg, data)
    res = RunResult()
    TASK_RUNNERS[cfg.task](cfg, data, res)
    return res


def manifest(cfg: ExperimentConfig, files: Dict[str, bytes]) -> bytes:
    doc = {
        "config": cfg.to_dict(),
        "config_sha256": cfg.digest(),
        "seed": cfg.seed,
        "versions": {
            "vpwgraph": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "files": {name: hashlib.sha256(blob).hexdigest() for name, blob in sorted(files.items())},
    }
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def run_experiment(cfg: ExperimentConfig, output_dir=None) -> RunResult:
    """Compute, then write CSV/SVG outputs, PNG figures and ``manifest.json``."""
    res = compute(cfg)
    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, blob in res.files.items():
        (out / name).write_bytes(blob)
    if cfg.figures:
        for name, draw in res.figures.items():
            draw(out / name)
    (out / "manifest.json").write_bytes(manifest(cfg, res.files))
    return res
