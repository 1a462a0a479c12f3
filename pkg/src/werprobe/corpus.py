"""Labeled utterance corpus: synthetic generation, encoding, balancing, IO.

A corpus holds speech turns with token sequences, raw signal samples, a true
WER value, and three categorical labels (style, accent, show). The generator
plants each factor into the tokens, the signal, and the WER so that the
factors are recoverable downstream, with per-factor effect sizes that can be
ablated to zero.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from werprobe.errors import (
    BalanceError,
    ConfigError,
    DataError,
    FormatError,
    VocabularyError,
)

SPLITS = ("TRAIN", "DEV", "TEST")
TASKS = ("SHOW", "STYLE", "ACCENT")
STYLE_LABELS = ("NonSpontaneous", "Spontaneous")
ACCENT_LABELS = ("Native", "NonNative")

PAD_TOKEN = "<pad>"
N_FILLER = 8
N_VARIANT = 12
TOPICS_PER_SHOW = 6

# noise-burst packet field planted into every signal; see _burst_templates.
# bursts live below the oscillator band, so the two are separable by
# frequency, but the bursts themselves differ only in phase structure
TEMPLATE_LEN = 192
TEMPLATE_BAND = (1, 26)  # rfft bin range, about 10-270 Hz at 2 kHz
N_DISTRACTORS = 16
PACKET_SLOTS = 10
PACKET_AMP = 0.6
# each factor cue is dropped independently per modality; the token side is
# dropped more often so a model cannot satisfy the factors from text alone
TEXT_CUE_RATE = 0.6
SIGNAL_CUE_RATE = 0.97

_SHOW_NAMES = (
    "MORNINGDESK",
    "NEWSTALK",
    "ROUNDTABLE",
    "CALLIN",
    "MARKETHOUR",
    "LATEREVIEW",
)


@dataclass(eq=False)
class Utterance:
    """One speech turn with its labels and targets."""

    id: str
    tokens: list[int]
    signal: np.ndarray
    duration: float
    wer: float
    style: str
    accent: str
    show: str
    split: str

    def label(self, task: str) -> str:
        if task == "SHOW":
            return self.show
        if task == "STYLE":
            return self.style
        if task == "ACCENT":
            return self.accent
        raise ConfigError(f"unknown task {task!r}; expected one of {TASKS}")


@dataclass
class EffectSizes:
    """Per-factor effect scales on tokens, signal, and WER (0 disables)."""

    style_tokens: float = 1.0
    style_signal: float = 1.0
    style_wer: float = 1.0
    accent_tokens: float = 1.0
    accent_signal: float = 1.0
    accent_wer: float = 1.0
    show_tokens: float = 1.0
    show_signal: float = 1.0
    show_wer: float = 1.0

    @classmethod
    def zero(cls) -> "EffectSizes":
        return cls(*([0.0] * 9))


@dataclass
class GeneratorConfig:
    n_train: int = 2000
    n_dev: int = 1200
    n_test: int = 800
    n_shows: int = 6
    vocab_size: int = 200
    sample_rate: int = 2000
    max_duration_s: float = 6.0
    wer_means: dict = field(
        default_factory=lambda: {"TRAIN": 22.29, "DEV": 22.35, "TEST": 31.20}
    )
    wer_max: float = 150.0
    wer_noise: float = 4.0
    effects: EffectSizes = field(default_factory=EffectSizes)
    seed: int = 0

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "effects"}
        d["effects"] = dict(self.effects.__dict__)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        d = dict(d)
        if "effects" in d:
            d["effects"] = EffectSizes(**d["effects"])
        return cls(**d)


@dataclass
class BalanceSpec:
    """How to balance one task: which labels to drop, and the sampling seed."""

    task: str
    excluded_labels: frozenset = frozenset()
    seed: int = 0


class Corpus:
    """Immutable collection of utterances plus vocabulary and provenance."""

    def __init__(
        self,
        utterances: list[Utterance],
        vocabulary: dict[str, int],
        sample_rate: int,
        metadata: dict,
    ):
        if vocabulary.get(PAD_TOKEN) != 0:
            raise ConfigError("vocabulary must reserve index 0 for the padding token")
        self.utterances = list(utterances)
        self.vocabulary = dict(vocabulary)
        self.sample_rate = int(sample_rate)
        self.metadata = dict(metadata)
        ids = [u.id for u in self.utterances]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate utterance ids in corpus")

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)

    def subset(self, split: str) -> list[Utterance]:
        if split not in SPLITS:
            raise ConfigError(f"unknown split {split!r}; expected one of {SPLITS}")
        return [u for u in self.utterances if u.split == split]

    def label_counts(self, task: str, split: str) -> dict[str, int]:
        counts: dict[str, int] = {}
        for u in self.subset(split):
            key = u.label(task)
            counts[key] = counts.get(key, 0) + 1
        return counts

    def task_labels(self, task: str) -> tuple[str, ...]:
        """All label values for a task, in a fixed deterministic order."""
        if task == "STYLE":
            return STYLE_LABELS
        if task == "ACCENT":
            return ACCENT_LABELS
        if task == "SHOW":
            return tuple(sorted({u.show for u in self.utterances}))
        raise ConfigError(f"unknown task {task!r}; expected one of {TASKS}")


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_digest(config: GeneratorConfig) -> str:
    return hashlib.sha256(_canonical_json(config.to_dict()).encode()).hexdigest()


def build_vocabulary(config: GeneratorConfig) -> dict[str, int]:
    """Token inventory: pad, fillers, accent variants, per-show topics, common pool."""
    reserved = 1 + N_FILLER + N_VARIANT + TOPICS_PER_SHOW * config.n_shows
    if config.vocab_size <= reserved:
        raise ConfigError(
            f"vocab_size {config.vocab_size} too small; needs > {reserved} "
            f"for {config.n_shows} shows"
        )
    words = [PAD_TOKEN]
    words += [f"fil{i:02d}" for i in range(N_FILLER)]
    words += [f"var{i:02d}" for i in range(N_VARIANT)]
    for s in range(config.n_shows):
        words += [f"top{s}{j}" for j in range(TOPICS_PER_SHOW)]
    words += [f"com{i:03d}" for i in range(config.vocab_size - reserved)]
    return {w: i for i, w in enumerate(words)}


def _token_blocks(config: GeneratorConfig) -> dict:
    base = 1
    filler = np.arange(base, base + N_FILLER)
    base += N_FILLER
    variant = np.arange(base, base + N_VARIANT)
    base += N_VARIANT
    topics = []
    for _ in range(config.n_shows):
        topics.append(np.arange(base, base + TOPICS_PER_SHOW))
        base += TOPICS_PER_SHOW
    common = np.arange(base, config.vocab_size)
    return {"filler": filler, "variant": variant, "topics": topics, "common": common}


def _zipf_weights(n: int) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1)
    return w / w.sum()


def _burst_templates(n: int, seed: int) -> np.ndarray:
    """n noise bursts with identical power spectra and energy, one per row.

    Every row is built from the same flat magnitude spectrum over
    TEMPLATE_BAND with independent random phases, so duration, energy, and
    spectrum are shared exactly; only the phase structure (the waveform
    shape) identifies a template. A linear filter passes the same output
    power for every row, which keeps untrained features blind to template
    identity, while a filter matched to one row sees its correlation peak.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 101]))
    n_bins = TEMPLATE_LEN // 2 + 1
    mag = np.zeros(n_bins)
    mag[TEMPLATE_BAND[0] : TEMPLATE_BAND[1] + 1] = 1.0
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n, n_bins))
    bank = np.fft.irfft(mag * np.exp(1j * phases), n=TEMPLATE_LEN, axis=1)
    return bank / np.sqrt(np.mean(bank[0] ** 2))


def show_names(n_shows: int) -> tuple[str, ...]:
    if n_shows <= len(_SHOW_NAMES):
        return _SHOW_NAMES[:n_shows]
    extra = tuple(f"SHOW{i}" for i in range(len(_SHOW_NAMES), n_shows))
    return _SHOW_NAMES + extra


def _split_marginals(config: GeneratorConfig) -> dict:
    """Per-split label probabilities; skews mirror real broadcast inventories."""
    n_seen = config.n_shows - 1
    show_w = np.linspace(1.0, 0.4, n_seen)
    return {
        "spont": {"TRAIN": 0.25, "DEV": 0.25, "TEST": 0.55},
        "nonnative": {"TRAIN": 0.34, "DEV": 0.39, "TEST": 0.23},
        "show": show_w / show_w.sum(),
    }


def generate_synthetic_corpus(config: GeneratorConfig) -> Corpus:
    """Deterministically build a corpus with planted style/accent/show factors.

    Every signal carries the same kind of bed: band-limited oscillators at a
    per-utterance random base frequency, broadband noise, and a field of
    short chip-burst packets drawn from a distractor bank, so that energy,
    spectrum, and packet-count statistics are label-independent. Factors are
    planted as needles against that bed. Shows own a topic-token block, a
    chip template, and a (narrow) base-frequency offset; spontaneous speech
    inserts filler tokens and a filler template and shortens sentences;
    non-native speech substitutes variant tokens, inserts an accent template,
    and nudges the oscillator frequency. Each cue is dropped independently
    per modality for a small fraction of utterances, so no single input
    branch can carry a factor on its own. WER per utterance is the split
    target plus factor offsets plus noise, recentered within each split so
    the empirical mean hits the target.
    """
    for name, n in (("n_train", config.n_train), ("n_dev", config.n_dev), ("n_test", config.n_test)):
        if n <= 0:
            raise ConfigError(f"{name} must be positive, got {n}")
    if config.n_shows < 2:
        raise ConfigError(f"n_shows must be >= 2, got {config.n_shows}")
    for split in SPLITS:
        mean = config.wer_means[split]
        if not 0.0 <= mean <= config.wer_max:
            raise ConfigError(f"wer mean {mean} for {split} outside [0, {config.wer_max}]")

    vocabulary = build_vocabulary(config)
    blocks = _token_blocks(config)
    common_weights = _zipf_weights(len(blocks["common"]))
    marginals = _split_marginals(config)
    names = show_names(config.n_shows)
    eff = config.effects
    sr = config.sample_rate

    # show frequency plan: a narrow grid around a center, deliberately buried
    # under the +-45 Hz per-utterance jitter below; zero show_signal collapses
    # the grid onto the center. The reliable show cue is the chip template.
    freq_grid = np.linspace(320.0, 360.0, config.n_shows)
    freq_center = float(freq_grid.mean())
    show_wer_offsets = np.linspace(-9.0, 9.0, config.n_shows)
    # template rows: one per show, then filler, accent, and the distractors
    bank = _burst_templates(config.n_shows + 2 + N_DISTRACTORS, config.seed)
    filler_tmpl = config.n_shows
    accent_tmpl = config.n_shows + 1
    distractor_base = config.n_shows + 2

    utterances: list[Utterance] = []
    counts = {"TRAIN": config.n_train, "DEV": config.n_dev, "TEST": config.n_test}
    for split_idx, split in enumerate(SPLITS):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, split_idx]))
        n = counts[split]
        raw_wer = np.empty(n)
        records = []
        for i in range(n):
            spont = rng.random() < marginals["spont"][split]
            nonnat = rng.random() < marginals["nonnative"][split]
            if split == "TEST":
                show_idx = config.n_shows - 1
            else:
                show_idx = int(rng.choice(config.n_shows - 1, p=marginals["show"]))
            style = STYLE_LABELS[1] if spont else STYLE_LABELS[0]
            accent = ACCENT_LABELS[1] if nonnat else ACCENT_LABELS[0]

            # per-factor cue gates, drawn independently for tokens and signal
            gate = rng.random(6)
            cue = np.concatenate(
                [gate[:3] < TEXT_CUE_RATE, gate[3:] < SIGNAL_CUE_RATE]
            )

            # tokens: a common-word bed with factor needles substituted in
            mean_len = 38.0 - (2.0 * eff.style_tokens if spont else 0.0)
            n_tok = int(np.clip(round(rng.normal(mean_len, 6.0)), 12, 60))
            tokens = rng.choice(blocks["common"], size=n_tok, p=common_weights)
            n_topic = round(1.0 * eff.show_tokens) if cue[0] else 0
            n_fill = round(1.0 * eff.style_tokens) if spont and cue[1] else 0
            n_var = round(2.0 * eff.accent_tokens) if nonnat and cue[2] else 0
            total = n_topic + n_fill + n_var
            if total:
                pos = rng.choice(n_tok, size=total, replace=False)
                tokens[pos[:n_topic]] = rng.choice(
                    blocks["topics"][show_idx], size=n_topic
                )
                tokens[pos[n_topic : n_topic + n_fill]] = rng.choice(
                    blocks["filler"], size=n_fill
                )
                tokens[pos[n_topic + n_fill :]] = rng.choice(
                    blocks["variant"], size=n_var
                )

            # signal bed: oscillators at a jittered base frequency, amplitude
            # modulation, and noise; all of it label-independent nuisance
            # except the (small) show grid offset and accent nudge
            duration_raw = rng.uniform(1.2, config.max_duration_s)
            n_samp = int(round(duration_raw * sr))
            t = np.arange(n_samp) / sr
            f0 = freq_center + (freq_grid[show_idx] - freq_center) * eff.show_signal
            f0 += rng.uniform(-45.0, 45.0)
            if nonnat:
                f0 += 8.0 * eff.accent_signal
            ph = rng.uniform(0.0, 2.0 * np.pi, size=3)
            base = 0.32 * np.sin(2 * np.pi * f0 * t + ph[0])
            base += 0.12 * np.sin(2 * np.pi * 1.7 * f0 * t + ph[1])
            depth = rng.uniform(0.05, 0.35)
            env = 1.0 + depth * np.sin(2 * np.pi * rng.uniform(2.0, 4.5) * t + ph[2])
            signal = env * base + 0.15 * rng.standard_normal(n_samp)

            # packet field: every zone gets a distractor burst; active cues
            # overwrite a few slots with the factor's template, so only the
            # chip identity separates the labels, never packet count/energy
            slots = distractor_base + rng.integers(0, N_DISTRACTORS, PACKET_SLOTS)
            n_show_p = round(3.0 * eff.show_signal) if cue[3] else 0
            n_fill_p = round(3.0 * eff.style_signal) if spont and cue[4] else 0
            n_acc_p = round(3.0 * eff.accent_signal) if nonnat and cue[5] else 0
            slots[: n_show_p] = show_idx
            slots[n_show_p : n_show_p + n_fill_p] = filler_tmpl
            slots[n_show_p + n_fill_p : n_show_p + n_fill_p + n_acc_p] = accent_tmpl
            rng.shuffle(slots)
            zone = n_samp // PACKET_SLOTS
            if zone >= TEMPLATE_LEN:
                for z, tmpl in enumerate(slots):
                    lo = z * zone + int(rng.integers(0, zone - TEMPLATE_LEN + 1))
                    signal[lo : lo + TEMPLATE_LEN] += PACKET_AMP * bank[tmpl]
            signal = np.clip(signal, -1.0, 1.0).astype(np.float32)

            # raw WER contribution (recentered per split below)
            raw = show_wer_offsets[show_idx] * eff.show_wer
            if spont:
                raw += 8.0 * eff.style_wer
            if nonnat:
                raw += 7.0 * eff.accent_wer
            raw += rng.normal(0.0, config.wer_noise) if config.wer_noise > 0 else 0.0
            raw_wer[i] = raw

            records.append(
                (tokens.tolist(), signal, n_samp / sr, style, accent, names[show_idx])
            )

        target = config.wer_means[split]
        centered = raw_wer - raw_wer.mean() + target
        final = np.clip(centered, 0.0, config.wer_max)
        for i, (tokens, signal, dur, style, accent, show) in enumerate(records):
            utterances.append(
                Utterance(
                    id=f"{split.lower()}-{i:05d}",
                    tokens=tokens,
                    signal=signal,
                    duration=dur,
                    wer=float(final[i]),
                    style=style,
                    accent=accent,
                    show=show,
                    split=split,
                )
            )

    metadata = {
        "generator_seed": config.seed,
        "config_digest": config_digest(config),
        "format_version": 1,
        "split_sizes": {
            s: sum(1 for u in utterances if u.split == s) for s in SPLITS
        },
        "wer_means": {
            s: float(np.mean([u.wer for u in utterances if u.split == s]))
            for s in SPLITS
        },
    }
    return Corpus(utterances, vocabulary, sr, metadata)


def pad_or_truncate_signal(signal: np.ndarray, target_len: int) -> np.ndarray:
    """Zero-pad at the end or cut to exactly target_len samples."""
    if target_len <= 0:
        raise ConfigError(f"target_len must be positive, got {target_len}")
    sig = np.asarray(signal, dtype=np.float32)
    if sig.shape[0] == target_len:
        return sig
    if sig.shape[0] > target_len:
        return sig[:target_len]
    out = np.zeros(target_len, dtype=np.float32)
    out[: sig.shape[0]] = sig
    return out


def encode_token_ids(tokens, vocab_size: int, max_tokens: int) -> np.ndarray:
    """Pad with index 0 / truncate a token-index sequence to max_tokens."""
    ids = np.asarray(tokens, dtype=np.int64)
    if ids.size == 0:
        raise DataError("utterance has no tokens")
    if ids.min() < 0 or ids.max() >= vocab_size:
        raise VocabularyError(f"token index out of range [0, {vocab_size})")
    out = np.zeros(max_tokens, dtype=np.int64)
    n = min(ids.size, max_tokens)
    out[:n] = ids[:n]
    return out


def encode_text(tokens, embeddings: np.ndarray, max_tokens: int) -> np.ndarray:
    """Token sequence -> (max_tokens, embed_dim) matrix of embedding rows."""
    table = np.asarray(embeddings)
    ids = encode_token_ids(tokens, table.shape[0], max_tokens)
    return table[ids]


def batch_arrays(
    utterances: list[Utterance], vocab_size: int, max_tokens: int, input_len: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack utterances into (token ids, padded signals, wer targets)."""
    n = len(utterances)
    ids = np.zeros((n, max_tokens), dtype=np.int64)
    signals = np.zeros((n, input_len), dtype=np.float32)
    wers = np.zeros(n, dtype=np.float32)
    for i, u in enumerate(utterances):
        ids[i] = encode_token_ids(u.tokens, vocab_size, max_tokens)
        signals[i] = pad_or_truncate_signal(u.signal, input_len)
        wers[i] = u.wer
    return ids, signals, wers


def balanced_counts(counts: dict[str, int], excluded: frozenset = frozenset()) -> dict[str, int]:
    """Per-label retained count after dropping excluded labels and downsampling
    every remaining label to the smallest remaining count."""
    retained = {k: v for k, v in counts.items() if k not in excluded}
    if len(retained) < 2:
        raise BalanceError(f"need at least 2 retained labels, have {sorted(retained)}")
    m = min(retained.values())
    if m == 0:
        empty = sorted(k for k, v in retained.items() if v == 0)
        raise BalanceError(f"labels {empty} have no items to balance")
    return {k: m for k in retained}


def default_excluded(corpus: Corpus, task: str) -> frozenset:
    """For SHOW, drop the smallest TRAIN show; other tasks drop nothing."""
    if task != "SHOW":
        return frozenset()
    counts = corpus.label_counts("SHOW", "TRAIN")
    if not counts:
        raise BalanceError("no TRAIN utterances to compute the smallest show from")
    smallest = min(sorted(counts), key=lambda k: counts[k])
    return frozenset({smallest})


def balance_for_task(
    corpus: Corpus, spec: BalanceSpec, splits: tuple[str, ...] = SPLITS
) -> Corpus:
    """Downsample each split so every retained label has equal count."""
    if spec.task not in TASKS:
        raise ConfigError(f"unknown task {spec.task!r}; expected one of {TASKS}")
    rng = np.random.default_rng(spec.seed)
    kept: list[Utterance] = []
    for split in splits:
        pool = corpus.subset(split)
        by_label: dict[str, list[Utterance]] = {}
        for u in pool:
            if u.label(spec.task) not in spec.excluded_labels:
                by_label.setdefault(u.label(spec.task), []).append(u)
        counts = {k: len(v) for k, v in by_label.items()}
        if len(counts) < 2:
            raise BalanceError(
                f"split {split}: fewer than 2 retained labels for task {spec.task}"
            )
        target = balanced_counts(counts, frozenset())
        for label in sorted(by_label):
            group = by_label[label]
            take = target[label]
            if take == len(group):
                kept.extend(group)
            else:
                picked = rng.choice(len(group), size=take, replace=False)
                kept.extend(group[i] for i in sorted(picked))
    metadata = dict(corpus.metadata)
    metadata["balanced_task"] = spec.task
    metadata["balanced_excluded"] = sorted(spec.excluded_labels)
    return Corpus(kept, corpus.vocabulary, corpus.sample_rate, metadata)


def save_corpus(corpus: Corpus, path: str) -> None:
    """Write meta.json, utterances.jsonl, and signals.bin into a directory."""
    os.makedirs(path, exist_ok=True)
    offset = 0
    lines = []
    chunks = []
    for u in corpus.utterances:
        sig = np.ascontiguousarray(u.signal, dtype="<f4")
        record = {
            "id": u.id,
            "tokens": u.tokens,
            "wer": u.wer,
            "style": u.style,
            "accent": u.accent,
            "show": u.show,
            "split": u.split,
            "signal_offset": offset,
            "signal_len": int(sig.shape[0]),
        }
        lines.append(_canonical_json(record))
        chunks.append(sig.tobytes())
        offset += sig.shape[0]
    meta = {
        "format_version": 1,
        "sample_rate": corpus.sample_rate,
        "vocabulary": corpus.vocabulary,
        "metadata": corpus.metadata,
        "n_utterances": len(corpus.utterances),
        "total_samples": offset,
    }
    with open(os.path.join(path, "meta.json"), "w", encoding="utf-8") as f:
        f.write(_canonical_json(meta))
    with open(os.path.join(path, "utterances.jsonl"), "w", encoding="utf-8") as f:
        f.write("\n".join(lines))
        if lines:
            f.write("\n")
    with open(os.path.join(path, "signals.bin"), "wb") as f:
        f.write(b"".join(chunks))


def load_corpus(path: str) -> Corpus:
    """Read a corpus directory; malformed content raises FormatError."""
    meta_path = os.path.join(path, "meta.json")
    try:
        with open(meta_path, "r", encoding="utf-8") as f:
            meta = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{meta_path}: invalid JSON at line {e.lineno}") from e
    for key in ("format_version", "sample_rate", "vocabulary", "metadata", "total_samples"):
        if key not in meta:
            raise FormatError(f"{meta_path}: missing key {key!r}")
    if meta["format_version"] != 1:
        raise FormatError(f"{meta_path}: unsupported format version {meta['format_version']}")

    samples = np.fromfile(os.path.join(path, "signals.bin"), dtype="<f4")
    if samples.shape[0] != meta["total_samples"]:
        raise FormatError(
            f"signals.bin holds {samples.shape[0]} samples, meta expects {meta['total_samples']}"
        )

    sr = int(meta["sample_rate"])
    utterances = []
    jsonl_path = os.path.join(path, "utterances.jsonl")
    with open(jsonl_path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(f"{jsonl_path}:{lineno}: invalid JSON") from e
            try:
                off, ln = rec["signal_offset"], rec["signal_len"]
                if off < 0 or off + ln > samples.shape[0]:
                    raise FormatError(
                        f"{jsonl_path}:{lineno}: signal range [{off}, {off + ln}) "
                        f"outside signals.bin"
                    )
                sig = samples[off : off + ln].copy()
                utterances.append(
                    Utterance(
                        id=rec["id"],
                        tokens=list(rec["tokens"]),
                        signal=sig,
                        duration=ln / sr,
                        wer=float(rec["wer"]),
                        style=rec["style"],
                        accent=rec["accent"],
                        show=rec["show"],
                        split=rec["split"],
                    )
                )
            except KeyError as e:
                raise FormatError(f"{jsonl_path}:{lineno}: missing field {e}") from e
    if len(utterances) != meta.get("n_utterances", len(utterances)):
        raise FormatError(
            f"{jsonl_path}: {len(utterances)} records, meta expects {meta['n_utterances']}"
        )
    return Corpus(utterances, meta["vocabulary"], sr, meta["metadata"])
