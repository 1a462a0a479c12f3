"""Markdown report collation over a run directory.

Expected layout under the run directory:

    corpus/meta.json            required
    train/<system>.metrics.json required (at least one)
    probes/*.csv                optional
    tsne/*.csv                  optional
    combined/combined.metrics.json  optional

The report is a pure function of the files on disk: rebuilding it over the
same artifacts yields byte-identical markdown. Metrics on evaluation splits
are printed as DEV||TEST pairs.
"""

from __future__ import annotations

import glob
import json
import os

from werprobe.errors import DataError, FormatError


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from e


def _fmt(value, digits: int = 2) -> str:
    if value is None:
        return "-"
    return f"{float(value):.{digits}f}"


def _pair(dev, test, digits: int = 2, sep: str = "||") -> str:
    # markdown table cells need the pipes escaped
    return f"{_fmt(dev, digits)}{sep}{_fmt(test, digits)}"


def _corpus_section(meta: dict) -> list[str]:
    info = meta.get("metadata", {})
    lines = ["## Corpus", ""]
    lines.append(f"- utterances: {meta.get('n_utterances', '-')}")
    if "config_digest" in info:
        lines.append(f"- generator digest: `{info['config_digest']}`")
    counts = info.get("split_sizes", {})
    if counts:
        sizes = ", ".join(f"{s} {counts[s]}" for s in sorted(counts))
        lines.append(f"- split sizes: {sizes}")
    means = info.get("wer_means", {})
    if means:
        text = ", ".join(f"{s} {_fmt(means[s])}" for s in sorted(means))
        lines.append(f"- WER means: {text}")
    lines.append("")
    return lines


def _train_section(entries: list[dict]) -> list[str]:
    lines = ["## Prediction systems", ""]
    tasks = sorted({t for e in entries for t in e.get("tasks", [])})
    header = ["system", "epoch", "MAE", "Kendall"] + [f"{t} acc" for t in tasks]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    cell = "\\|\\|"
    for e in entries:
        dev, test = e["DEV"], e["TEST"]
        row = [
            e["system"],
            str(e.get("selected_epoch", "-")),
            _pair(dev["mae"], test["mae"], sep=cell),
            _pair(dev["kendall"], test["kendall"], sep=cell),
        ]
        for t in tasks:
            da = dev.get("accuracy", {}).get(t)
            ta = test.get("accuracy", {}).get(t)
            if da is None and ta is None:
                row.append("-")
            else:
                row.append(_pair(None if da is None else 100 * da,
                                 None if ta is None else 100 * ta, sep=cell))
        lines.append("| " + " | ".join(row) + " |")
    lines.append("")
    digests = sorted({e["config_digest"] for e in entries if "config_digest" in e})
    for d in digests:
        lines.append(f"- config digest: `{d}`")
    if digests:
        lines.append("")
    return lines


def _csv_table(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as f:
        rows = [line.rstrip("\n").split(",") for line in f if line.strip()]
    if not rows:
        return []
    lines = ["| " + " | ".join(rows[0]) + " |", "|" + "---|" * len(rows[0])]
    for row in rows[1:]:
        lines.append("| " + " | ".join(row) + " |")
    return lines


def _probe_section(paths: list[str]) -> list[str]:
    lines = ["## Probing", ""]
    for path in paths:
        lines.append(f"### {os.path.splitext(os.path.basename(path))[0]}")
        lines.append("")
        lines.extend(_csv_table(path))
        lines.append("")
    return lines


def _tsne_section(paths: list[str]) -> list[str]:
    lines = ["## t-SNE projections", ""]
    for path in paths:
        with open(path, "r", encoding="utf-8") as f:
            n = sum(1 for _ in f) - 1
        lines.append(f"- `{os.path.basename(path)}`: {n} points")
    lines.append("")
    return lines


def _combined_section(summary: dict) -> list[str]:
    lines = ["## Combined system", ""]
    lines.append(f"- systems averaged: {summary.get('n_systems', '-')}")
    dev, test = summary.get("DEV"), summary.get("TEST")
    if dev or test:
        mae = _pair(dev and dev.get("mae"), test and test.get("mae"))
        tau = _pair(dev and dev.get("kendall"), test and test.get("kendall"))
        lines.append(f"- MAE {mae}, Kendall {tau}")
    lines.append("")
    return lines


def build_report(run_dir: str) -> str:
    """Assemble the run report, raising DataError on missing required inputs."""
    corpus_meta_path = os.path.join(run_dir, "corpus", "meta.json")
    train_paths = sorted(glob.glob(os.path.join(run_dir, "train", "*.metrics.json")))
    missing = []
    if not os.path.exists(corpus_meta_path):
        missing.append(corpus_meta_path)
    if not train_paths:
        missing.append(os.path.join(run_dir, "train", "*.metrics.json"))
    if missing:
        raise DataError("missing required artifacts: " + ", ".join(missing))

    lines = ["# Run report", ""]
    lines.append("Split metrics are shown as DEV||TEST.")
    lines.append("")
    lines.extend(_corpus_section(_load_json(corpus_meta_path)))

    entries = [_load_json(p) for p in train_paths]
    entries.sort(key=lambda e: (len(e.get("tasks", [])), e["system"]))
    lines.extend(_train_section(entries))

    probe_paths = sorted(glob.glob(os.path.join(run_dir, "probes", "*.csv")))
    if probe_paths:
        lines.extend(_probe_section(probe_paths))

    tsne_paths = sorted(glob.glob(os.path.join(run_dir, "tsne", "*.csv")))
    if tsne_paths:
        lines.extend(_tsne_section(tsne_paths))

    combined_path = os.path.join(run_dir, "combined", "combined.metrics.json")
    if os.path.exists(combined_path):
        lines.extend(_combined_section(_load_json(combined_path)))

    return "\n".join(lines).rstrip("\n") + "\n"
