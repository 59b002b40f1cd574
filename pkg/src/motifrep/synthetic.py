"""Bundled synthetic corpus: random diatonic melodies plus constructed repetitions.

Stands in for a real pop-piano corpus so the whole pipeline (ingest, build,
train, evaluate) runs out of the box. Each song is two bars: a seed motif and
one constructed repetition of a designated type. Every song is validated
end-to-end through segmentation, key inference, and classification before it
is accepted, so the emitted labels are oracle-checked by construction.

Each repetition type gets a distinct rhythmic signature (note count and slot
grid). That keeps the input-only classification task well-posed: with real
corpora one motif can pair under several labels, which makes type prediction
from the first motif alone ill-defined.
"""

from __future__ import annotations

import itertools

import numpy as np

from .notes import Motif, Note, NoteSequence, concat_motifs, quantize, segment_bars
from .rules import (
    Direction,
    RepetitionType,
    TRAINABLE_TYPES,
    classify,
    infer_key,
    lcs_similarity,
    negate_development,
    reverse_development,
)

TPQ = 480
SLOT = TPQ // 4

# slot grid, duration (slots), note count per repetition type
_SIGNATURES = {
    RepetitionType.STRICT: ((0, 4, 8, 12), 4),
    RepetitionType.TRANSPOSITIONAL: ((0, 2, 4, 6, 8, 10, 12, 14), 2),
    RepetitionType.SUBSEQUENTIAL: ((0, 2, 4, 8, 10, 12), 2),
    RepetitionType.HOMODIRECTIONAL: ((0, 3, 6, 9, 12), 3),
    RepetitionType.SYMMETRIC: ((0, 6, 12), 4),
}

_SCALES = {
    "C": (0, 2, 4, 5, 7, 9, 11),
    "G": (7, 9, 11, 0, 2, 4, 6),
    "D": (2, 4, 6, 7, 9, 11, 1),
    "F": (5, 7, 9, 10, 0, 2, 4),
}

_U, _D, _S = Direction.UP, Direction.DOWN, Direction.SAME


def _asymmetric_devs(length: int) -> list[tuple[Direction, ...]]:
    """Direction patterns whose mirror transforms all fall below 75% LCS."""
    out = []
    for dev in itertools.product((_U, _D, _S), repeat=length):
        transforms = (
            negate_development(dev),
            reverse_development(dev),
            negate_development(reverse_development(dev)),
        )
        if all(lcs_similarity(t, dev) < 0.75 for t in transforms):
            out.append(dev)
    return out


_HOR_DEVS = _asymmetric_devs(4)


def _scale_pitches(scale: tuple[int, ...]) -> list[int]:
    return sorted(p for p in range(48, 85) if p % 12 in scale)


def _diatonic_walk(rng: np.random.Generator, pitches: list[int], count: int) -> list[int]:
    idx = int(rng.integers(8, len(pitches) - 8))
    out = [pitches[idx]]
    for _ in range(count - 1):
        idx = int(np.clip(idx + rng.integers(-3, 4), 0, len(pitches) - 1))
        out.append(pitches[idx])
    return out


def _realize(
    pitches: list[int], start: int, dev: tuple[Direction, ...], magnitudes: list[int]
) -> list[int]:
    """Walk `dev` from a scale index with the given per-step magnitudes."""
    idx = start
    out = [pitches[idx]]
    for d, m in zip(dev, magnitudes):
        step = 0 if d is _S else m
        idx = int(np.clip(idx + (step if d is _U else -step), 0, len(pitches) - 1))
        out.append(pitches[idx])
    return out


def _bar(pitches, slots, dur, velocities) -> Motif:
    notes = tuple(
        Note(p, s * SLOT, min(dur, 16 - s) * SLOT, v)
        for p, s, v in zip(pitches, slots, velocities)
    )
    return Motif(0, NoteSequence(notes=notes, ticks_per_quarter=TPQ))


def _velocities(rng: np.random.Generator, n: int) -> list[int]:
    return [int(4 * rng.integers(8, 28) + 2) for _ in range(n)]


def _make_pair(
    rng: np.random.Generator, label: RepetitionType, scale: tuple[int, ...]
) -> tuple[Motif, Motif]:
    """Seed motif plus one constructed repetition.

    Randomness lives entirely in the seed; the repetition is a deterministic
    function of (seed, label). With stochastic repetitions a regression
    decoder could only learn a blurred conditional mean, which would make
    desk-scale matching rates meaningless.
    """
    slots, dur = _SIGNATURES[label]
    pitches = _scale_pitches(scale)
    n = len(slots)

    if label == RepetitionType.STRICT:
        mel = _diatonic_walk(rng, pitches, n)
        rep = mel  # strict repetition: identical pitch sequence
    elif label == RepetitionType.TRANSPOSITIONAL:
        mel = _diatonic_walk(rng, pitches, n)
        sign = 1 if mel[-1] >= mel[0] else -1
        t = sign * (1 + mel[0] % 4)
        rep = [p + t for p in mel]
    elif label == RepetitionType.SUBSEQUENTIAL:
        mel = _diatonic_walk(rng, pitches, n)
        rep = list(mel)
        at = mel[0] % n
        idx = pitches.index(rep[at])
        idx = idx - 2 if idx >= 2 else idx + 2
        rep[at] = pitches[idx]
    elif label == RepetitionType.HOMODIRECTIONAL:
        # same direction pattern, step magnitudes swapped 1 <-> 2
        dev = _HOR_DEVS[int(rng.integers(0, len(_HOR_DEVS)))]
        mags = [int(rng.integers(1, 3)) if d is not _S else 0 for d in dev]
        # start far enough from the range ends that no step ever clips;
        # clipping would break the seed -> repetition determinism
        start = int(rng.integers(8, len(pitches) - 8))
        mel = _realize(pitches, start, dev, mags)
        rep = _realize(pitches, start, dev, [3 - m if m else 0 for m in mags])
    else:  # SYMMETRIC: mirrored intervals, or time reversal when the seed opens downward
        while True:
            mel = _diatonic_walk(rng, pitches, n)
            if len(set(mel)) > 1:
                break
        if mel[1] >= mel[0]:
            rep = [mel[0]]
            for a, b in zip(mel, mel[1:]):
                rep.append(rep[-1] - (b - a))
        else:
            rep = list(reversed(mel))

    if any(not 0 <= p <= 127 for p in rep):
        raise _RetryPair()
    velocities = _velocities(rng, n)
    a = _bar(mel, slots, dur, velocities)
    b = _bar(rep, slots, dur, velocities)
    return a, b


class _RetryPair(Exception):
    pass


def synthetic_song(
    rng: np.random.Generator, label: RepetitionType, max_tries: int = 80
) -> NoteSequence:
    """A two-bar song whose ordered bar pair classifies exactly to `label`."""
    scale_name = list(_SCALES)[int(rng.integers(0, len(_SCALES)))]
    scale = _SCALES[scale_name]
    bpm = float(int(rng.choice([96, 120, 126, 132])))
    for _ in range(max_tries):
        try:
            a, b = _make_pair(rng, label, scale)
        except _RetryPair:
            continue
        song = concat_motifs([a, b], ticks_per_quarter=TPQ, bpm=bpm)
        song = quantize(song)
        bars = segment_bars(song)
        if len(bars) != 2:
            continue
        key = infer_key(song)
        if classify(bars[0], bars[1], key).variant == label:
            return song
    raise RuntimeError(f"could not construct a verified {label.value} pair")


def synthetic_corpus(
    songs_per_type: int = 40, seed: int = 0
) -> list[tuple[str, NoteSequence]]:
    """Deterministic labeled corpus with songs_per_type songs of each type."""
    rng = np.random.default_rng(seed)
    corpus = []
    for label in TRAINABLE_TYPES:
        for i in range(songs_per_type):
            song_id = f"syn-{label.value.lower()}-{i:05d}"
            corpus.append((song_id, synthetic_song(rng, label)))
    return corpus
