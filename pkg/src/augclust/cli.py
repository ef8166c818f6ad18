"""Command-line entry point.

Subcommands: train, ablate, sweep, synth, bench. Exit codes: 0 success,
2 configuration error, 3 dataset error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .autodiff import NumericError
from .config import ConfigError
from .graphs import DataError, Graph, load_graph, write_graph
from .kernels import BACKEND
from .metrics import MetricReport
from .synth import sbm_graph
from .trainer import TrainConfig, TrainReport, train

SWEEP_PARAMS = ("alpha", "tau", "temp", "filter_depth")

ABLATION_VARIANTS = [
    ("full", {}),
    ("no_aug_x", {"attribute_augmentor": "none"}),
    ("no_aug_s", {"structure_augmentor": "none"}),
    ("no_both", {"structure_augmentor": "none",
                 "attribute_augmentor": "none"}),
    ("mask_feature", {"baseline_view": "mask_feature", "baseline_rate": 0.2}),
    ("drop_edges", {"baseline_view": "drop_edges", "baseline_rate": 0.2}),
    ("add_edges", {"baseline_view": "add_edges", "baseline_rate": 0.2}),
    ("diffusion", {"baseline_view": "diffusion", "baseline_rate": 0.2}),
]


def _load_dataset(resolved: dict) -> Graph:
    attr = resolved["dataset.attr"]
    edges = resolved["dataset.edges"]
    if attr is None or edges is None:
        raise DataError("dataset.attr and dataset.edges must be configured")
    return load_graph(attr, edges, resolved["dataset.labels"])


def _make_train_config(resolved: dict) -> TrainConfig:
    cfg = TrainConfig(**cfgmod.train_kwargs(resolved))
    try:
        return cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _write_report(out_dir: Path, resolved: dict, report: TrainReport) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.txt").write_text(cfgmod.manifest_text(resolved))
    payload = report.to_json_dict()
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")
    with (out_dir / "embeddings.csv").open("w") as fh:
        for row in report.embeddings:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
    with (out_dir / "assignments.csv").open("w") as fh:
        for label in report.assignments:
            fh.write(f"{label}\n")


def _metric_line(name: str, metrics: MetricReport | None) -> str:
    if metrics is None:
        return f"{name:>14}  (no labels)"
    return (f"{name:>14}  acc={metrics.acc:.4f} nmi={metrics.nmi:.4f} "
            f"ari={metrics.ari:.4f} f1={metrics.f1:.4f}")


def cmd_train(args) -> int:
    resolved = cfgmod.resolve(args.config, args.set)
    if args.out is not None:
        resolved["output_dir"] = args.out
    graph = _load_dataset(resolved)
    cfg = _make_train_config(resolved)
    report = train(cfg, graph)
    out_dir = Path(resolved["output_dir"])
    _write_report(out_dir, resolved, report)
    print(f"kernel backend: {BACKEND}")
    print(f"trained {cfg.epochs} epochs in "
          f"{report.wall_clock_seconds:.1f}s -> {out_dir}")
    print(_metric_line("final", report.final_metrics))
    return 0


def cmd_ablate(args) -> int:
    resolved = cfgmod.resolve(args.config, args.set)
    if args.out is not None:
        resolved["output_dir"] = args.out
    graph = _load_dataset(resolved)
    if graph.labels is None:
        raise DataError("ablation requires a labelled dataset")
    out_dir = Path(resolved["output_dir"])

    rows = []
    for name, overrides in ABLATION_VARIANTS:
        variant = dict(resolved)
        variant.update(overrides)
        variant["output_dir"] = str(out_dir / name)
        cfg = _make_train_config(variant)
        report = train(cfg, graph)
        _write_report(Path(variant["output_dir"]), variant, report)
        rows.append({"variant": name, **report.final_metrics.as_dict()})
        print(_metric_line(name, report.final_metrics))

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "ablation.json").write_text(
        json.dumps(rows, indent=2, sort_keys=True) + "\n")
    with (out_dir / "ablation.csv").open("w") as fh:
        fh.write("variant,acc,nmi,ari,f1\n")
        for row in rows:
            fh.write(f"{row['variant']},{row['acc']!r},{row['nmi']!r},"
                     f"{row['ari']!r},{row['f1']!r}\n")
    return 0


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_PARAMS:
        raise ConfigError(
            f"unknown sweep param: {args.param} (choose from "
            f"{', '.join(SWEEP_PARAMS)})")
    resolved = cfgmod.resolve(args.config, args.set)
    if args.out is not None:
        resolved["output_dir"] = args.out
    graph = _load_dataset(resolved)
    if graph.labels is None:
        raise DataError("sweep requires a labelled dataset")
    out_dir = Path(resolved["output_dir"])

    rows = []
    for value in args.values:
        variant = dict(resolved)
        parser, _ = cfgmod.SCHEMA[args.param]
        variant[args.param] = parser(value)
        variant["output_dir"] = str(out_dir / f"{args.param}={value}")
        cfg = _make_train_config(variant)
        report = train(cfg, graph)
        _write_report(Path(variant["output_dir"]), variant, report)
        rows.append({args.param: variant[args.param],
                     **report.final_metrics.as_dict()})
        print(_metric_line(f"{args.param}={value}", report.final_metrics))

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "sweep.json").write_text(
        json.dumps(rows, indent=2, sort_keys=True) + "\n")
    with (out_dir / "sweep.csv").open("w") as fh:
        fh.write(f"{args.param},acc,nmi,ari,f1\n")
        for row in rows:
            fh.write(f"{row[args.param]!r},{row['acc']!r},{row['nmi']!r},"
                     f"{row['ari']!r},{row['f1']!r}\n")
    return 0


def cmd_synth(args) -> int:
    try:
        graph = sbm_graph(args.n_per_block, args.blocks, args.p_in,
                          args.p_out, args.attr_sep, args.seed,
                          attr_dim=args.attr_dim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    paths = write_graph(args.out, graph, stem="synth")
    cfg_path = Path(args.out) / "synth.cfg"
    lines = [f"dataset.attr = {paths['attr']}",
             f"dataset.edges = {paths['edges']}",
             f"dataset.labels = {paths['labels']}",
             f"k = {graph.k}"]
    cfg_path.write_text("\n".join(lines) + "\n")
    print(f"wrote {graph.n}-node dataset to {args.out} "
          f"(config stub: {cfg_path})")
    return 0


def cmd_bench(args) -> int:
    from .bench import run_bench
    run_bench(n=args.n, d=args.d, k=args.k, repeats=args.repeats)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="augclust",
        description="Graph node clustering with learnable augmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key")
        p.add_argument("--out", help="output directory")

    p_train = sub.add_parser("train", help="run one training job")
    add_common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_ablate = sub.add_parser(
        "ablate", help="run the augmentation ablation variants")
    add_common(p_ablate)
    p_ablate.set_defaults(func=cmd_ablate)

    p_sweep = sub.add_parser("sweep", help="sweep one hyperparameter")
    add_common(p_sweep)
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", nargs="+", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_synth = sub.add_parser("synth", help="generate a block-model dataset")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--blocks", type=int, default=2)
    p_synth.add_argument("--n-per-block", type=int, default=50)
    p_synth.add_argument("--p-in", type=float, default=0.2)
    p_synth.add_argument("--p-out", type=float, default=0.01)
    p_synth.add_argument("--attr-sep", type=float, default=5.0)
    p_synth.add_argument("--attr-dim", type=int, default=16)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)

    p_bench = sub.add_parser(
        "bench", help="compare compiled kernels against the numpy fallback")
    p_bench.add_argument("--n", type=int, default=1500)
    p_bench.add_argument("--d", type=int, default=128)
    p_bench.add_argument("--k", type=int, default=8)
    p_bench.add_argument("--repeats", type=int, default=5)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
