"""Labeled repetition datasets from a corpus: pair, classify, pad, split, report.

Every ordered motif pair (earlier bar, later bar) inside a configurable
window is classified; pairs labeled None or Ambiguous are dropped; the rest
become (input, target, label) samples with both matrices padded to 120 rows.
Serialization is JSON Lines with a manifest sidecar.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .chords import slot_chords
from .notes import NoteSequence, quantize, segment_bars
from .rules import (
    Key,
    RepetitionType,
    TRAINABLE_TYPES,
    SIMILARITY_THRESHOLD,
    classify,
    infer_key,
)
from .vocab import TokenMatrix, tokenize


@dataclass(frozen=True)
class BuildConfig:
    """Knobs for dataset construction; defaults follow the corpus-scale setup."""

    window: int | None = None  # None = all pairs within a song
    holdout_songs: int = 100
    seed: int = 0
    similarity_threshold: float = SIMILARITY_THRESHOLD

    @classmethod
    def from_file(cls, path: str | Path) -> "BuildConfig":
        return cls(**_load_config_mapping(path, set(cls.__dataclass_fields__)))


def _load_config_mapping(path: str | Path, allowed: set[str]) -> dict:
    """Read a TOML or JSON key-value config, keeping only known keys."""
    path = Path(path)
    text = path.read_bytes()
    if path.suffix == ".toml":
        try:
            import tomllib  # py>=3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        raw = tomllib.loads(text.decode())
    else:
        raw = json.loads(text)
    unknown = set(raw) - allowed
    if unknown:
        raise ValueError(f"unknown config keys in {path.name}: {sorted(unknown)}")
    return raw


@dataclass(frozen=True)
class RepetitionSample:
    """One labeled ordered pair: input motif, its later repetition, the label."""

    input: TokenMatrix
    target: TokenMatrix
    label: RepetitionType
    song_id: str
    bar_indices: tuple[int, int]

    def to_json_dict(self) -> dict:
        return {
            "song_id": self.song_id,
            "bar_indices": list(self.bar_indices),
            "label": self.label.value,
            "input": self.input.to_json_dict(),
            "target": self.target.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RepetitionSample":
        from .rules import parse_type

        return cls(
            input=TokenMatrix.from_json_dict(d["input"]),
            target=TokenMatrix.from_json_dict(d["target"]),
            label=parse_type(d["label"]),
            song_id=d["song_id"],
            bar_indices=(int(d["bar_indices"][0]), int(d["bar_indices"][1])),
        )


@dataclass
class DatasetManifest:
    counts: dict[str, int]
    percentages: dict[str, float]
    avg_token_length: dict[str, float]
    split: str
    holdout_song_ids: list[str] = field(default_factory=list)
    ambiguous_rate: float = 0.0
    song_keys: dict[str, str] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return asdict(self)


@dataclass
class BuildResult:
    samples: list[RepetitionSample]
    song_keys: dict[str, str]
    ambiguous_pairs: int
    labeled_pairs: int

    @property
    def ambiguous_rate(self) -> float:
        total = self.ambiguous_pairs + self.labeled_pairs
        return self.ambiguous_pairs / total if total else 0.0


def build_dataset(
    corpus: list[tuple[str, NoteSequence]], config: BuildConfig = BuildConfig()
) -> BuildResult:
    """Classify all in-window motif pairs of every song into labeled samples.

    The corpus must be quantized 4/4 material; quantize() is idempotent so it
    is applied defensively. Songs are processed in sorted id order and pairs
    in (bar_i, bar_j) order, which makes output order deterministic.
    """
    if not corpus:
        warnings.warn("empty corpus: building an empty dataset", stacklevel=2)
        return BuildResult([], {}, 0, 0)

    samples: list[RepetitionSample] = []
    song_keys: dict[str, str] = {}
    ambiguous = 0
    labeled = 0
    for song_id, seq in sorted(corpus, key=lambda p: p[0]):
        seq = quantize(seq)
        motifs = segment_bars(seq)
        if not motifs:
            continue
        key = infer_key(seq)
        song_keys[song_id] = str(key)
        tokens = {
            m.bar_index: tokenize(m, tempo=seq.tempo_at(m.bar_index * seq.ticks_per_bar), chords=slot_chords(m))
            for m in motifs
        }
        for i, a in enumerate(motifs):
            for b in motifs[i + 1 :]:
                if config.window is not None and b.bar_index - a.bar_index > config.window:
                    break
                label = classify(a, b, key, config.similarity_threshold)
                if label.variant == RepetitionType.AMBIGUOUS:
                    ambiguous += 1
                    continue
                if label.variant == RepetitionType.NONE:
                    continue
                labeled += 1
                samples.append(
                    RepetitionSample(
                        input=tokens[a.bar_index],
                        target=tokens[b.bar_index],
                        label=label.variant,
                        song_id=song_id,
                        bar_indices=(a.bar_index, b.bar_index),
                    )
                )
    return BuildResult(samples, song_keys, ambiguous, labeled)


def split(
    samples: list[RepetitionSample], holdout_songs: int, seed: int = 0
) -> tuple[list[RepetitionSample], list[RepetitionSample]]:
    """Song-level holdout: train and test never share a song_id."""
    song_ids = sorted({s.song_id for s in samples})
    if holdout_songs > len(song_ids):
        raise ValueError(
            f"cannot hold out {holdout_songs} songs from {len(song_ids)}"
        )
    rng = np.random.default_rng(seed)
    held = set(rng.permutation(song_ids)[:holdout_songs].tolist())
    train = [s for s in samples if s.song_id not in held]
    test = [s for s in samples if s.song_id in held]
    return train, test


def stats(samples: list[RepetitionSample], split_name: str = "train") -> DatasetManifest:
    """Per-label counts, percentages, and mean token length."""
    counts = {t.value: 0 for t in TRAINABLE_TYPES}
    lengths = {t.value: 0 for t in TRAINABLE_TYPES}
    for s in samples:
        counts[s.label.value] += 1
        lengths[s.label.value] += s.target.valid_len
    total = sum(counts.values())
    percentages = {
        k: (100.0 * v / total if total else 0.0) for k, v in counts.items()
    }
    avg_len = {
        k: (lengths[k] / counts[k] if counts[k] else 0.0) for k in counts
    }
    return DatasetManifest(
        counts=counts,
        percentages=percentages,
        avg_token_length=avg_len,
        split=split_name,
    )


# ---------------------------------------------------------------------------
# serialization

def write_jsonl(samples: list[RepetitionSample], path: str | Path) -> None:
    with open(path, "w") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_json_dict(), separators=(",", ":")) + "\n")


def read_jsonl(path: str | Path) -> list[RepetitionSample]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(RepetitionSample.from_json_dict(json.loads(line)))
    return out


def write_dataset(
    directory: str | Path,
    result: BuildResult,
    config: BuildConfig,
) -> tuple[DatasetManifest, DatasetManifest]:
    """Split and lay out train.jsonl / test.jsonl / manifest.json."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train, test = split(result.samples, config.holdout_songs, config.seed)
    write_jsonl(train, directory / "train.jsonl")
    write_jsonl(test, directory / "test.jsonl")

    held = sorted({s.song_id for s in test})
    manifests = []
    for name, part in (("train", train), ("test", test)):
        m = stats(part, name)
        m.holdout_song_ids = held
        m.ambiguous_rate = result.ambiguous_rate
        m.song_keys = result.song_keys
        manifests.append(m)
    with open(directory / "manifest.json", "w") as fh:
        json.dump(
            {
                "train": manifests[0].to_json_dict(),
                "test": manifests[1].to_json_dict(),
                "config": asdict(config),
            },
            fh,
            indent=2,
        )
    return manifests[0], manifests[1]


def read_manifest(directory: str | Path) -> dict:
    with open(Path(directory) / "manifest.json") as fh:
        return json.load(fh)


def verify_sample(sample: RepetitionSample, key: Key, threshold: float = SIMILARITY_THRESHOLD) -> bool:
    """Re-run classification on the serialized motifs; True iff the label holds."""
    from .vocab import detokenize

    a = detokenize(sample.input, bar_index=sample.bar_indices[0])
    b = detokenize(sample.target, bar_index=sample.bar_indices[1])
    return classify(a, b, key, threshold).variant == sample.label


def verify_dataset(directory: str | Path) -> int:
    """Check classify self-consistency of every serialized sample.

    Returns the number of samples checked; raises on the first violation.
    Song keys come from the manifest, matching the keys used at build time.
    """
    directory = Path(directory)
    manifest = read_manifest(directory)
    checked = 0
    for part in ("train", "test"):
        song_keys = manifest[part]["song_keys"]
        threshold = manifest.get("config", {}).get(
            "similarity_threshold", SIMILARITY_THRESHOLD
        )
        for s in read_jsonl(directory / f"{part}.jsonl"):
            key = Key.parse(song_keys[s.song_id])
            if not verify_sample(s, key, threshold):
                raise AssertionError(
                    f"sample {s.song_id} bars {s.bar_indices} fails self-consistency"
                )
            checked += 1
    return checked
