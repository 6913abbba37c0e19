"""Command-line interface.

Exit codes: 0 success, 1 domain error (named on stderr), 2 usage error.
Output files are written atomically; set EMBNUM_THREADS to cap loader
parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import baselines, dataset, embnet, labeling, metric
from ._serial import atomic_write_text
from .errors import EmbnumError, MissingDirectory

# width_multiplier 1/8 + 30 epochs: the CPU-friendly regime used by the
# bundled synthetic fixture
DESK_PRESET = {
    "width_multiplier": 0.125,
    "epochs": 30,
    "batch_labels": 10,
    "samples_per_label": 3,
}

ARCH_DEFAULTS = {"h": 100, "k": 100, "stem_channels": 64,
                 "width_multiplier": 1.0, "input_norm": "signed_log"}
TRAIN_DEFAULTS = {"alpha": 0.2, "lr0": 0.01, "lr_step": 10, "lr_decay": 0.1,
                  "momentum": 0.9, "weight_decay": 1e-5, "epochs": 100,
                  "batch_labels": 8, "samples_per_label": 4, "seed": 0}


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=["desk"], default=None,
                   help="flag bundle; 'desk' shrinks width to 1/8 and epochs to 30")
    p.add_argument("--h", type=int, default=None, help="sampled input width")
    p.add_argument("--k", type=int, default=None, help="embedding dimension")
    p.add_argument("--stem-channels", type=int, default=None)
    p.add_argument("--width-multiplier", type=float, default=None)
    p.add_argument("--input-norm", choices=list(embnet.INPUT_NORMS), default=None)
    p.add_argument("--alpha", type=float, default=None, help="triplet margin")
    p.add_argument("--lr0", type=float, default=None)
    p.add_argument("--lr-step", type=int, default=None)
    p.add_argument("--lr-decay", type=float, default=None)
    p.add_argument("--momentum", type=float, default=None)
    p.add_argument("--weight-decay", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-labels", type=int, default=None)
    p.add_argument("--samples-per-label", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)


def _resolve(args, fields: dict) -> dict:
    out = dict(fields)
    if args.preset == "desk":
        out.update({k: v for k, v in DESK_PRESET.items() if k in fields})
    for name in fields:
        flag = getattr(args, name, None)
        if flag is not None:
            out[name] = flag
    return out


def _configs(args) -> tuple[embnet.ArchConfig, metric.TrainConfig]:
    return (embnet.ArchConfig(**_resolve(args, ARCH_DEFAULTS)),
            metric.TrainConfig(**_resolve(args, TRAIN_DEFAULTS)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embnum",
        description="Semantic labeling of numerical table columns by "
                    "embedding similarity, with statistical baselines.",
        epilog="EMBNUM_THREADS caps parallel file loading.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset directory")
    p.add_argument("spec", help="SyntheticSpec JSON file")
    p.add_argument("out", help="output dataset directory (must not already hold data)")

    p = sub.add_parser("sample", help="reduce a CSV column to an h-length quantile vector")
    p.add_argument("csv", help="one numeric value per line")
    p.add_argument("--h", type=int, default=100)
    p.add_argument("--method", choices=["inverse", "random"], default="inverse")
    p.add_argument("--seed", type=int, default=0, help="rng seed for --method random")

    p = sub.add_parser("train", help="train the embedding model on a dataset")
    p.add_argument("data", help="dataset directory")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--history", default=None,
                   help="history CSV path (default: <out>.history.csv)")
    _add_model_flags(p)

    p = sub.add_parser("index", help="build a feature store from labeled data")
    p.add_argument("data", help="dataset directory")
    p.add_argument("--method", choices=list(labeling.METHODS), required=True)
    p.add_argument("--out", required=True, help="store output path")
    p.add_argument("--model", default=None, help="embnum checkpoint")
    p.add_argument("--dsl-model", default=None,
                   help="dsl weights JSON; trained on the indexed data when omitted")

    p = sub.add_parser("label", help="rank store records against a query column")
    p.add_argument("store", help="feature store file")
    p.add_argument("query", help="query CSV, one numeric value per line")
    p.add_argument("--top", type=int, default=5, help="entries to print")

    p = sub.add_parser("benchmark", help="run the leave-one-source-out protocol")
    p.add_argument("data", help="dataset directory")
    p.add_argument("--method", choices=list(labeling.METHODS), required=True)
    p.add_argument("--model", default=None, help="embnum checkpoint")
    p.add_argument("--dsl-model", default=None, help="dsl weights JSON")
    p.add_argument("--out", default=None, help="report JSON path (default: stdout)")

    p = sub.add_parser("export-embeddings", help="dump every attribute's embedding as CSV")
    p.add_argument("model", help="embnum checkpoint")
    p.add_argument("data", help="dataset directory")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    return parser


def _cmd_gen(args) -> int:
    spec = dataset.spec_from_json(Path(args.spec).read_text(encoding="utf-8"))
    out = Path(args.out)
    if out.exists() and any(out.iterdir()):
        raise MissingDirectory(f"refusing to write into non-empty directory {out}")
    ds = dataset.generate_synthetic(spec)
    dataset.write_dataset(ds, out)
    print(f"wrote {len(ds.attributes)} attributes "
          f"({len(ds.labels)} labels x {len(ds.sources)} sources) to {out}")
    return 0


def _cmd_sample(args) -> int:
    attr = dataset.load_attribute_csv(args.csv)
    if args.method == "inverse":
        from .sampling import sample_inverse_transform
        vec = sample_inverse_transform(attr.values, args.h)
    else:
        from .sampling import sample_random_choice
        vec = sample_random_choice(attr.values, args.h, seed=args.seed)
    print(",".join(dataset.format_value(v) for v in vec))
    return 0


def _cmd_train(args) -> int:
    arch, cfg = _configs(args)
    ds = dataset.load_dataset(args.data)
    model, history = metric.train(ds, arch, cfg)
    out = Path(args.out)
    embnet.save_model(model, out)
    history_path = Path(args.history) if args.history else out.with_name(out.name + ".history.csv")
    atomic_write_text(history_path, metric.history_to_csv(history))
    print(f"best train MRR {model.training_meta['best_mrr']:.4f} "
          f"after epoch {model.training_meta['epochs_seen']}; "
          f"checkpoint {out}, history {history_path}")
    return 0


def _load_scorers(args):
    model = embnet.load_model(args.model) if args.model else None
    dsl_model = baselines.load_dsl_model(args.dsl_model) if args.dsl_model else None
    return model, dsl_model


def _cmd_index(args) -> int:
    ds = dataset.load_dataset(args.data)
    model, dsl_model = _load_scorers(args)
    if args.method == "dsl" and dsl_model is None:
        dsl_model = baselines.dsl_train(baselines.make_training_pairs(ds))
    store = labeling.index_labeled(ds, args.method, model=model, dsl_model=dsl_model)
    labeling.save_store(store, Path(args.out))
    print(f"indexed {len(store.records)} attributes ({args.method}) into {args.out}")
    return 0


def _cmd_label(args) -> int:
    store = labeling.load_store(Path(args.store))
    query = dataset.load_attribute_csv(args.query)
    ranking = labeling.rank(store, query)
    for entry in ranking.entries[: args.top]:
        print(f"{entry.label},{entry.source},{entry.score!r}")
    return 0


def _cmd_benchmark(args) -> int:
    ds = dataset.load_dataset(args.data)
    model, dsl_model = _load_scorers(args)
    report = labeling.run_benchmark(ds, args.method, model=model, dsl_model=dsl_model)
    text = labeling.report_to_json(report)
    if args.out:
        atomic_write_text(Path(args.out), text)
        print(f"{report.total_experiments} experiments ({args.method}) -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_export(args) -> int:
    model = embnet.load_model(args.model)
    ds = dataset.load_dataset(args.data)
    text = labeling.export_embeddings_csv(model, ds)
    if args.out:
        atomic_write_text(Path(args.out), text)
        print(f"wrote embeddings for {len(ds.attributes)} attributes to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "sample": _cmd_sample,
    "train": _cmd_train,
    "index": _cmd_index,
    "label": _cmd_label,
    "benchmark": _cmd_benchmark,
    "export-embeddings": _cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.cmd](args)
    except EmbnumError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
