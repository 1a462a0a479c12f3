"""Command-line surface: gen, train, probe, tsne, combine, report.

Exit codes: 0 success, 2 configuration error, 3 I/O or file-format error,
4 data/alignment error, 5 numeric failure (training divergence). Every
command is deterministic given the config digest and seed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from werprobe import corpus as corpus_mod
from werprobe import probing, report as report_mod, training
from werprobe.analysis import metrics as metrics_mod
from werprobe.analysis import plots
from werprobe.analysis.tsne import tsne_project
from werprobe.config import ExperimentSystem, RunConfig, default_manifest
from werprobe.corpus import SPLITS, TASKS, generate_synthetic_corpus, load_corpus, save_corpus
from werprobe.errors import (
    ConfigError,
    DataError,
    FormatError,
    NumericError,
    WerprobeError,
)
from werprobe.model import LAYER_NAMES, Model
from werprobe.training import TrainConfig, evaluate_model, train_prediction_model

PREDICTIONS_HEADER = "id,split,true_wer,predicted_wer"


def _run_config(args) -> RunConfig:
    seed = getattr(args, "seed", None)
    if getattr(args, "config", None):
        return RunConfig.from_file(args.config, seed_override=seed)
    return RunConfig(seed_override=seed)


def _parse_tasks(text: str | None) -> tuple[str, ...]:
    if text is None or text.strip() == "":
        return ()
    tasks = tuple(t.strip().upper() for t in text.split(","))
    for t in tasks:
        if t not in TASKS:
            raise ConfigError(f"unknown task {t!r}; expected subset of {TASKS}")
    if len(set(tasks)) != len(tasks):
        raise ConfigError(f"duplicate tasks in {text!r}")
    return tasks


def _parse_bucket(text: str) -> tuple[float, float]:
    parts = text.split("..")
    if len(parts) != 2:
        raise ConfigError(f"bucket must look like LO..HI, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as e:
        raise ConfigError(f"bucket bounds must be numbers, got {text!r}") from e
    if not lo < hi:
        raise ConfigError(f"bucket needs lo < hi, got {text!r}")
    return lo, hi


def _fmt_metric(value: float | None, digits: int = 2) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def _dev_test_line(name: str, dev: training.MetricsReport, test: training.MetricsReport) -> str:
    parts = [
        f"{name}: MAE {_fmt_metric(dev.mae)}||{_fmt_metric(test.mae)}",
        f"Kendall {_fmt_metric(dev.kendall)}||{_fmt_metric(test.kendall)}",
    ]
    for task in dev.accuracy:
        parts.append(
            f"{task} acc {_fmt_metric(100 * dev.accuracy[task])}"
            f"||{_fmt_metric(100 * test.accuracy[task])}"
        )
    return "  ".join(parts)


def _label_table(corpus: corpus_mod.Corpus, task: str) -> str:
    labels = corpus.task_labels(task)
    lines = [f"{task} counts:"]
    header = f"  {'label':<16}" + "".join(f"{s:>8}" for s in SPLITS)
    lines.append(header)
    for label in labels:
        row = f"  {label:<16}"
        for split in SPLITS:
            row += f"{corpus.label_counts(task, split).get(label, 0):>8}"
        lines.append(row)
    return "\n".join(lines)


def cmd_gen(args) -> int:
    cfg = _run_config(args)
    gen_config = cfg.generator_config()
    corpus = generate_synthetic_corpus(gen_config)
    out_dir = args.out or os.path.join(cfg.doc["paths"]["out_dir"], "corpus")
    save_corpus(corpus, out_dir)
    print(f"corpus written to {out_dir}")
    print(f"config digest: {cfg.digest()}")
    print(f"generator digest: {corpus.metadata['config_digest']}")
    sizes = "  ".join(f"{s} {len(corpus.subset(s))}" for s in SPLITS)
    print(f"split sizes: {sizes}")
    means = "  ".join(
        f"{s} {np.mean([u.wer for u in corpus.subset(s)]):.2f}" for s in SPLITS
    )
    print(f"WER means: {means}")
    for task in TASKS:
        print(_label_table(corpus, task))
    return 0


def _write_predictions_csv(path: str, reports: list[training.MetricsReport]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(PREDICTIONS_HEADER + "\n")
        for rep in reports:
            for uid, true_wer, pred in rep.predictions:
                f.write(f"{uid},{rep.split},{true_wer!r},{pred!r}\n")


def _metrics_dict(rep: training.MetricsReport) -> dict:
    return {
        "n": rep.n_utterances,
        "mae": rep.mae,
        "kendall": rep.kendall,
        "accuracy": {k: v for k, v in sorted(rep.accuracy.items())},
    }


def _train_one_system(
    system: ExperimentSystem, cfg: RunConfig, corpus: corpus_mod.Corpus,
    task_weight: float | None, seed: int, out_dir: str,
) -> str:
    task_labels = {t: corpus.task_labels(t) for t in system.tasks}
    model = Model(cfg.model_config(corpus.vocab_size, task_labels, seed=seed))
    train_cfg_kwargs = dict(cfg.doc["train"])
    train_cfg_kwargs["seed"] = seed
    if task_weight is not None:
        train_cfg_kwargs["task_weight"] = task_weight
    train_config = TrainConfig(**train_cfg_kwargs)
    best, log = train_prediction_model(model, corpus, system.tasks, train_config)

    dev = evaluate_model(best, corpus, "DEV")
    test = evaluate_model(best, corpus, "TEST")
    base = os.path.join(out_dir, system.name)
    training.save_checkpoint(
        best, log, base + ".ckpt",
        {"system": system.name, "tasks": list(system.tasks), "config_digest": cfg.digest()},
    )
    with open(base + ".log.csv", "w", encoding="utf-8") as f:
        f.write(log.to_csv())
    _write_predictions_csv(base + ".predictions.csv", [dev, test])
    with open(base + ".metrics.json", "w", encoding="utf-8") as f:
        payload = {
            "system": system.name,
            "tasks": list(system.tasks),
            "seed": seed,
            "config_digest": cfg.digest(),
            "selected_epoch": log.selected_record().epoch,
            "DEV": _metrics_dict(dev),
            "TEST": _metrics_dict(test),
        }
        f.write(json.dumps(payload, sort_keys=True, separators=(",", ":")))
    return _dev_test_line(system.name, dev, test)


def _thread_cap(n_jobs: int) -> int:
    env = os.environ.get("WERPROBE_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as e:
            raise ConfigError(f"WERPROBE_THREADS must be an integer, got {env!r}") from e
        if cap < 1:
            raise ConfigError(f"WERPROBE_THREADS must be >= 1, got {cap}")
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def cmd_train(args) -> int:
    cfg = _run_config(args)
    corpus = load_corpus(args.corpus)
    out_dir = args.out or os.path.join(cfg.doc["paths"]["out_dir"], "train")
    os.makedirs(out_dir, exist_ok=True)
    base_seed = cfg.doc["train"]["seed"]

    if args.manifest:
        systems = default_manifest().systems
        # each system gets a disjoint seed stream; fan-out is capped by
        # WERPROBE_THREADS and results are independent of the cap
        jobs = [
            (system, base_seed + 1000 * i) for i, system in enumerate(systems)
        ]
        lines = [None] * len(jobs)
        with ThreadPoolExecutor(max_workers=_thread_cap(len(jobs))) as pool:
            futures = {
                pool.submit(
                    _train_one_system, system, cfg, corpus, args.task_weight, seed, out_dir
                ): i
                for i, (system, seed) in enumerate(jobs)
            }
            for fut, i in futures.items():
                lines[i] = fut.result()
        for line in lines:
            print(line)
        return 0

    tasks = _parse_tasks(args.tasks)
    name = args.name or ("WER" + "".join("+" + t for t in tasks))
    system = ExperimentSystem(name, tasks)
    print(_train_one_system(system, cfg, corpus, args.task_weight, base_seed, out_dir))
    return 0


def cmd_probe(args) -> int:
    cfg = _run_config(args)
    corpus = load_corpus(args.corpus)
    model, meta = training.load_checkpoint(args.checkpoint)
    if args.random_model:
        # control: same architecture, freshly initialized, never trained
        model = Model(dataclasses.replace(model.config, seed=model.config.seed + 7919))
    layers = tuple(l.strip() for l in args.layers.split(",")) if args.layers else LAYER_NAMES
    for layer in layers:
        if layer not in LAYER_NAMES:
            raise ConfigError(f"unknown layer {layer!r}; valid layers are {LAYER_NAMES}")
    tasks = _parse_tasks(args.tasks) or TASKS
    table = probing.run_probe_suite(
        model, corpus, tasks=tasks, layers=layers,
        probe_config=cfg.probe_config(), balance_seed=cfg.seed,
    )
    out = args.out or "probe_table.csv"
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        f.write(table.to_csv())
    tag = " (random-model control)" if args.random_model else ""
    print(f"probe table{tag} written to {out}")
    print(table.to_csv(), end="")
    return 0


def cmd_tsne(args) -> int:
    cfg = _run_config(args)
    corpus = load_corpus(args.corpus)
    model, _ = training.load_checkpoint(args.checkpoint)
    layer = args.layer
    if layer not in LAYER_NAMES:
        raise ConfigError(f"unknown layer {layer!r}; valid layers are {LAYER_NAMES}")
    lo, hi = _parse_bucket(args.bucket)
    pool = corpus.subset(args.split)
    bucket = metrics_mod.duration_bucket(pool, lo, hi)
    if not bucket:
        raise DataError(
            f"duration bucket [{lo}, {hi}) matched 0 of {len(pool)} {args.split} utterances"
        )
    acts = probing.extract_all_layers(model, bucket)[layer]
    result = tsne_project(acts, cfg.tsne_config())
    out = args.out or f"tsne_{layer}"
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out + ".csv", "w", encoding="utf-8") as f:
        f.write("id,x,y,label,duration\n")
        for u, (x, y) in zip(bucket, result.coordinates):
            f.write(f"{u.id},{x!r},{y!r},{u.style},{u.duration!r}\n")
    with open(out + ".svg", "w", encoding="utf-8") as f:
        f.write(plots.scatter_svg(result.coordinates, [u.style for u in bucket]))
    print(f"t-SNE over {len(bucket)} utterances written to {out}.csv / {out}.svg")
    print(f"KL start {result.initial_kl:.4f} end {result.final_kl:.4f}")
    return 0


def _read_predictions_csv(path: str) -> dict:
    """Returns {(id, split): (true_wer, predicted_wer)}."""
    rows = {}
    with open(path, "r", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != PREDICTIONS_HEADER.split(","):
            raise FormatError(f"{path}: expected header {PREDICTIONS_HEADER!r}")
        for parts in reader:
            if len(parts) != 4:
                raise FormatError(f"{path}: malformed row {parts!r}")
            rows[(parts[0], parts[1])] = (float(parts[2]), float(parts[3]))
    if not rows:
        raise DataError(f"{path}: no prediction rows")
    return rows


def cmd_combine(args) -> int:
    systems = [_read_predictions_csv(p) for p in args.inputs]
    truths = systems[0]
    preds = metrics_mod.combine_predictions(
        [{key: v[1] for key, v in system.items()} for system in systems]
    )
    for path, system in zip(args.inputs[1:], systems[1:]):
        for key, (true_wer, _) in system.items():
            if truths[key][0] != true_wer:
                raise DataError(
                    f"{path}: true WER for {key[0]} disagrees with {args.inputs[0]}"
                )
    out_dir = args.out or "combined"
    os.makedirs(out_dir, exist_ok=True)
    keys = sorted(preds)
    with open(os.path.join(out_dir, "combined.csv"), "w", encoding="utf-8") as f:
        f.write(PREDICTIONS_HEADER + "\n")
        for key in keys:
            f.write(f"{key[0]},{key[1]},{truths[key][0]!r},{preds[key]!r}\n")
    summary = {"n_systems": len(systems)}
    for split in ("DEV", "TEST"):
        split_keys = [k for k in keys if k[1] == split]
        if not split_keys:
            continue
        t = [truths[k][0] for k in split_keys]
        p = [preds[k] for k in split_keys]
        entry = {"n": len(split_keys), "mae": metrics_mod.mae(p, t)}
        try:
            entry["kendall"] = 100.0 * metrics_mod.kendall_tau(t, p)
        except NumericError:
            entry["kendall"] = None
        summary[split] = entry
        print(
            f"combined {split}: n {entry['n']} MAE {entry['mae']:.2f} "
            f"Kendall {_fmt_metric(entry.get('kendall'))}"
        )
    with open(os.path.join(out_dir, "combined.metrics.json"), "w", encoding="utf-8") as f:
        f.write(json.dumps(summary, sort_keys=True, separators=(",", ":")))
    print(f"combined predictions written to {out_dir}")
    return 0


def cmd_report(args) -> int:
    out = args.out or os.path.join(args.run_dir, "report.md")
    text = report_mod.build_report(args.run_dir)
    with open(out, "w", encoding="utf-8") as f:
        f.write(text)
    print(f"report written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="werprobe",
        description="WER prediction from text and raw signal, with probing analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--seed", type=int, help="override the global seed")
    p.add_argument("--out", help="corpus output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train a prediction model")
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--seed", type=int, help="override the global seed")
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--tasks", default="", help="comma-separated auxiliary tasks")
    p.add_argument("--task-weight", type=float, default=None, dest="task_weight")
    p.add_argument("--name", help="system name for output files")
    p.add_argument("--manifest", action="store_true",
                   help="train the full system manifest instead of one model")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("probe", help="run the layer probing suite")
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--seed", type=int, help="override the global seed")
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--checkpoint", required=True, help="model checkpoint")
    p.add_argument("--tasks", default="", help="comma-separated tasks (default: all)")
    p.add_argument("--layers", default="", help="comma-separated layers (default: all)")
    p.add_argument("--random-model", action="store_true", dest="random_model",
                   help="probe a freshly initialized model instead")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("tsne", help="project one layer to 2-D")
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--seed", type=int, help="override the global seed")
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--checkpoint", required=True, help="model checkpoint")
    p.add_argument("--layer", default="C2")
    p.add_argument("--bucket", default="4..5", help="duration bucket LO..HI in seconds")
    p.add_argument("--split", default="DEV", choices=list(SPLITS))
    p.add_argument("--out", help="output path prefix (.csv and .svg)")
    p.set_defaults(func=cmd_tsne)

    p = sub.add_parser("combine", help="average per-system predictions")
    p.add_argument("inputs", nargs="+", help="prediction CSVs to combine")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("report", help="collate run artifacts into markdown")
    p.add_argument("run_dir", help="directory holding corpus/train/probes/... outputs")
    p.add_argument("--out", help="output markdown path")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (FormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except NumericError as e:
        print(f"error: {e}", file=sys.stderr)
        return 5
    except WerprobeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
