"""
Command line front end.

    vpwgraph generate  --generator toroidal_helix --n 2095 --out data/
    vpwgraph embed     --k 10 --bandwidth vpw --adjust b --out runs/helix
    vpwgraph classify  --csv digits.csv --labels --bandwidth vpw --adjust c
    vpwgraph diagnose  --csv digits.csv --labels --k 10
    vpwgraph bench     configs/ --out bench/

``--config file.json`` replaces all other flags. Exit codes: 0 ok,
2 validation, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import traceback
from pathlib import Path

from .config import ExperimentConfig
from .errors import DataFormatError, NumericError, ValidationError, VpwError
from .experiment import run_experiment

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _points(text):
    return [_floats(p) for p in text.split(";") if p.strip()]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON experiment config; supersedes all other flags")
    src = p.add_argument_group("dataset")
    src.add_argument("--csv", help="input CSV (comma separated, no header by default)")
    src.add_argument("--labels", action="store_true", help="last CSV column holds integer labels")
    src.add_argument("--header", action="store_true", help="skip the first CSV row")
    src.add_argument("--generator", choices=["toroidal_helix", "uneven_blobs"], default="toroidal_helix")
    src.add_argument("--n", type=int, default=2095, help="helix point count")
    src.add_argument("--coils", type=int, default=8)
    src.add_argument("--noise", type=float, default=0.0, help="helix noise sd")
    src.add_argument("--centers", default="0,0;6,0", help="blob centers, e.g. '0,0;6,0'")
    src.add_argument("--counts", default="200,40")
    src.add_argument("--sds", default="0.5,2.0")
    src.add_argument("--pca", type=int, help="reduce to this many principal components first")
    g = p.add_argument_group("graph")
    g.add_argument("--k", type=int, default=10, help="nearest neighbours per point")
    g.add_argument("--bandwidth", default="vpw",
                   help="user:<v>|mean|silverman|k:<r>|mmm|ea:<perp>|vpw")
    g.add_argument("--adjust", default="none", choices=["none", "b", "c", "bd"])
    g.add_argument("--literal-exponents", action="store_true",
                   help="square the already-squared distances inside the VPW kernel")
    g.add_argument("--eq4", action="store_true", help="divide by the VPW factor instead of its square")
    g.add_argument("--ea-support", choices=["graph", "complete"], default="graph")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vpwgraph", description=__doc__.split("\n\n")[0].strip(),
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset to data.csv")
    _add_common(p)

    p = sub.add_parser("embed", help="Laplacian eigenmap embedding and eigenvalue report")
    _add_common(p)
    p.add_argument("--d-out", type=int, default=2)
    p.add_argument("--n-eigs", type=int, default=10)
    p.add_argument("--compare", nargs="*", default=[],
                   help="extra estimators for the eigenvalue report, e.g. mean silverman vpw/b")

    p = sub.add_parser("classify", help="pairwise LapRLSC error table")
    _add_common(p)
    p.add_argument("--lambda-a", type=float, default=1e-4)
    p.add_argument("--lambda-i", type=float, default=1e-2)
    p.add_argument("--gamma", type=float, help="RBF kernel width (default: mean neighbour distance)")
    p.add_argument("--labels-per-class", type=int, default=2)
    p.add_argument("--test-fraction", type=float, default=0.5)
    p.add_argument("--repeats", type=int, default=20)

    p = sub.add_parser("diagnose", help="random-walk and cluster-distance adjustment selection")
    _add_common(p)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--walks", type=int, default=1000)

    p = sub.add_parser("bench", help="run every *.json config in a directory")
    p.add_argument("configs", help="directory of JSON configs")
    p.add_argument("--out", default="bench", help="root directory for per-config outputs")
    return parser


def config_from_args(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        if cfg.task != args.command:
            raise ValidationError(f"config task {cfg.task!r} does not match subcommand {args.command!r}")
        return cfg
    if args.csv:
        dataset = {"csv": args.csv, "has_labels": args.labels, "header": args.header}
    elif args.generator == "toroidal_helix":
        dataset = {"generator": "toroidal_helix",
                   "params": {"n": args.n, "coils": args.coils, "noise_sd": args.noise}}
    else:
        try:
            params = {"centers": _points(args.centers), "counts": [int(c) for c in _floats(args.counts)],
                      "sds": _floats(args.sds)}
        except ValueError as exc:
            raise ValidationError(f"bad blob parameters: {exc}") from None
        dataset = {"generator": "uneven_blobs", "params": params}
    if args.pca:
        dataset["pca"] = args.pca
    exponent = "literal" if args.literal_exponents else "eq4" if args.eq4 else "squared"
    raw = dict(seed=args.seed, task=args.command, dataset=dataset, k=args.k, bandwidth=args.bandwidth,
               adjust=args.adjust, exponent=exponent, ea_support=args.ea_support,
               output_dir=args.out, figures=not args.no_figures)
    for key in ("d_out", "n_eigs", "compare", "lambda_a", "lambda_i", "gamma", "labels_per_class",
                "test_fraction", "repeats", "steps", "walks"):
        if hasattr(args, key):
            raw[key] = getattr(args, key)
    return ExperimentConfig.from_dict(raw)


def _origin(exc: BaseException) -> str:
    """Name of the innermost package module the exception passed through."""
    name = "cli"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("vpwgraph."):
            name = mod.split(".", 1)[1]
    return name


def _report(exc: BaseException, context: str) -> int:
    if isinstance(exc, ValidationError):
        code = EXIT_VALIDATION
    elif isinstance(exc, NumericError):
        code = EXIT_NUMERIC
    elif isinstance(exc, (DataFormatError, OSError)):
        code = EXIT_IO
    else:
        code = getattr(exc, "exit_code", 1)
    print(f"error [{_origin(exc)}] {context}: {exc}", file=sys.stderr)
    return code


def run_bench(config_dir, out_root) -> int:
    config_dir = Path(config_dir)
    paths = sorted(config_dir.glob("*.json"))
    if not paths:
        print(f"error [cli] {config_dir}: no *.json configs found", file=sys.stderr)
        return EXIT_IO
    rows = ["config,file,sha256"]
    status = EXIT_OK
    for path in paths:
        try:
            cfg = ExperimentConfig.load(path)
            out = Path(out_root) / path.stem
            res = run_experiment(cfg, out)
        except (VpwError, OSError) as exc:
            status = max(status, _report(exc, str(path)))
            continue
        for name in sorted(res.files):
            if name.endswith(".csv"):
                rows.append(f"{path.stem},{name},{hashlib.sha256(res.files[name]).hexdigest()}")
    Path(out_root).mkdir(parents=True, exist_ok=True)
    (Path(out_root) / "bench.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "bench":
        return run_bench(args.configs, args.out)
    context = f"config {args.config}" if args.config else "command line"
    try:
        cfg = config_from_args(args)
        res = run_experiment(cfg)
    except (VpwError, OSError) as exc:
        return _report(exc, context)
    if res.stdout:
        sys.stdout.write(res.stdout)
    print(json.dumps({"output_dir": cfg.output_dir, "files": sorted(res.files)}), file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
