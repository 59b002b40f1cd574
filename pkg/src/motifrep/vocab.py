"""Compound-token vocabulary and the motif <-> token-matrix conversions.

A motif is encoded as an L x K integer matrix (L = 120 rows, K = 7
attributes, fixed order tempo/chord/position/type/pitch/duration/velocity).
Each occupied sixteenth slot contributes one metric row followed by one
note row per note at that slot. Token 0 is the pad in every attribute.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .notes import Motif, Note, NoteSequence, SLOTS_PER_BAR, VELOCITY_BINS

MAX_ROWS = 120
NUM_ATTRIBUTES = 7
ATTRIBUTES = ("tempo", "chord", "position", "type", "pitch", "duration", "velocity")
(A_TEMPO, A_CHORD, A_POSITION, A_TYPE, A_PITCH, A_DURATION, A_VELOCITY) = range(7)

PAD = 0
TYPE_NOTE, TYPE_METRIC, TYPE_EOS = 1, 2, 3

TEMPO_BINS = tuple(32 + 3 * i for i in range(64))  # 32 .. 221 bpm

CHORD_QUALITIES = ("maj", "min", "dim", "aug", "maj7", "min7", "dom7", "sus2", "sus4")
PITCH_CLASS_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
NO_CHORD = "N"


class VocabularyError(ValueError):
    """A token fell outside its attribute's vocabulary."""


@dataclass(frozen=True)
class Vocabulary:
    """Bijective token <-> value tables for the seven attributes.

    Sizes include the pad at index 0: tempo 65, chord 110, position 17,
    type 4, pitch 129, duration 33, velocity 33.
    """

    sizes: tuple[int, ...] = (
        1 + len(TEMPO_BINS),
        2 + 12 * len(CHORD_QUALITIES),
        1 + SLOTS_PER_BAR,
        4,
        1 + 128,
        1 + 32,
        1 + len(VELOCITY_BINS),
    )

    def size(self, attribute: int) -> int:
        return self.sizes[attribute]

    # --- tempo ---
    def tempo_token(self, bpm: float) -> int:
        idx = int(round((bpm - TEMPO_BINS[0]) / 3))
        return 1 + min(len(TEMPO_BINS) - 1, max(0, idx))

    def tempo_value(self, token: int) -> float:
        self._check(A_TEMPO, token)
        return float(TEMPO_BINS[token - 1])

    # --- chord ---
    def chord_token(self, label: str) -> int:
        if label == NO_CHORD:
            return 1
        root_name, _, quality = label.partition(":")
        try:
            root = PITCH_CLASS_NAMES.index(root_name)
            q = CHORD_QUALITIES.index(quality)
        except ValueError:
            raise VocabularyError(f"unknown chord label {label!r}") from None
        return 2 + root * len(CHORD_QUALITIES) + q

    def chord_value(self, token: int) -> str:
        self._check(A_CHORD, token)
        if token == 1:
            return NO_CHORD
        root, q = divmod(token - 2, len(CHORD_QUALITIES))
        return f"{PITCH_CLASS_NAMES[root]}:{CHORD_QUALITIES[q]}"

    # --- position / pitch / duration ---
    def position_token(self, slot: int) -> int:
        if not 0 <= slot < SLOTS_PER_BAR:
            raise VocabularyError(f"slot {slot} outside [0, {SLOTS_PER_BAR})")
        return 1 + slot

    def position_value(self, token: int) -> int:
        self._check(A_POSITION, token)
        return token - 1

    def pitch_token(self, pitch: int) -> int:
        if not 0 <= pitch <= 127:
            raise VocabularyError(f"pitch {pitch} outside [0, 127]")
        return 1 + pitch

    def pitch_value(self, token: int) -> int:
        self._check(A_PITCH, token)
        return token - 1

    def duration_token(self, slots: int) -> int:
        return min(32, max(1, slots))

    def duration_value(self, token: int) -> int:
        self._check(A_DURATION, token)
        return token

    # --- velocity ---
    def velocity_token(self, velocity: int) -> int:
        idx = min(31, max(0, int(round((velocity - 2) / 4))))
        return 1 + idx

    def velocity_value(self, token: int) -> int:
        self._check(A_VELOCITY, token)
        return VELOCITY_BINS[token - 1]

    def _check(self, attribute: int, token: int) -> None:
        if not 1 <= token < self.sizes[attribute]:
            raise VocabularyError(
                f"token {token} outside {ATTRIBUTES[attribute]} vocabulary "
                f"[1, {self.sizes[attribute] - 1}]"
            )


VOCAB = Vocabulary()


@dataclass(frozen=True)
class TokenMatrix:
    """An L x K compound-token matrix with an explicit valid length."""

    rows: np.ndarray
    valid_len: int

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.shape != (MAX_ROWS, NUM_ATTRIBUTES):
            raise ValueError(f"rows must be {MAX_ROWS}x{NUM_ATTRIBUTES}, got {rows.shape}")
        if not 0 <= self.valid_len <= MAX_ROWS:
            raise ValueError(f"valid_len {self.valid_len} outside [0, {MAX_ROWS}]")
        if rows[self.valid_len :].any():
            raise ValueError("pad rows after valid_len must be all zero")
        if self.valid_len and (rows[: self.valid_len, A_TYPE] == PAD).any():
            raise ValueError("rows before valid_len must have a non-pad type")
        object.__setattr__(self, "rows", rows)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TokenMatrix)
            and self.valid_len == other.valid_len
            and bool(np.array_equal(self.rows, other.rows))
        )

    def to_json_dict(self, **extra) -> dict:
        d = {"valid_len": self.valid_len, "rows": self.rows.tolist()}
        d.update(extra)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "TokenMatrix":
        return cls(rows=np.array(d["rows"], dtype=np.int64), valid_len=int(d["valid_len"]))


def tokenize(
    motif: Motif,
    tempo: float = 120.0,
    chords: list[str] | tuple[str, ...] | None = None,
    vocab: Vocabulary = VOCAB,
) -> TokenMatrix:
    """Encode one quantized bar as a TokenMatrix.

    `chords` gives one label per sixteenth slot ("N" when absent). Rows past
    120 are dropped with a warning that reports how many were lost.
    """
    if chords is None:
        chords = [NO_CHORD] * SLOTS_PER_BAR
    if len(chords) != SLOTS_PER_BAR:
        raise ValueError(f"need {SLOTS_PER_BAR} chord labels, got {len(chords)}")

    step = motif.notes.ticks_per_slot
    tempo_tok = vocab.tempo_token(tempo)

    by_slot: dict[int, list[Note]] = {}
    for n in motif.notes.notes:
        slot = n.onset // step
        by_slot.setdefault(slot, []).append(n)

    rows: list[list[int]] = []
    for slot in sorted(by_slot):
        chord_tok = vocab.chord_token(chords[slot])
        pos_tok = vocab.position_token(slot)
        rows.append([tempo_tok, chord_tok, pos_tok, TYPE_METRIC, PAD, PAD, PAD])
        for n in by_slot[slot]:
            rows.append(
                [
                    tempo_tok,
                    chord_tok,
                    pos_tok,
                    TYPE_NOTE,
                    vocab.pitch_token(n.pitch),
                    vocab.duration_token(max(1, round(n.duration / step))),
                    vocab.velocity_token(n.velocity),
                ]
            )

    if len(rows) > MAX_ROWS:
        warnings.warn(
            f"motif encoding needs {len(rows)} rows; truncated {len(rows) - MAX_ROWS}",
            stacklevel=2,
        )
        rows = rows[:MAX_ROWS]

    matrix = np.zeros((MAX_ROWS, NUM_ATTRIBUTES), dtype=np.int64)
    if rows:
        matrix[: len(rows)] = rows
    return TokenMatrix(rows=matrix, valid_len=len(rows))


def detokenize(
    tm: TokenMatrix,
    ticks_per_quarter: int = 480,
    bar_index: int = 0,
    vocab: Vocabulary = VOCAB,
) -> Motif:
    """Decode a TokenMatrix back into a Motif. Pad and metric rows carry no notes."""
    step = max(1, ticks_per_quarter // 4)
    notes = []
    for r in range(tm.valid_len):
        row = tm.rows[r]
        row_type = int(row[A_TYPE])
        if row_type not in (TYPE_NOTE, TYPE_METRIC, TYPE_EOS):
            raise VocabularyError(f"row {r}: invalid type token {row_type}")
        try:
            vocab._check(A_TEMPO, int(row[A_TEMPO]))
            vocab._check(A_CHORD, int(row[A_CHORD]))
            slot = vocab.position_value(int(row[A_POSITION]))
        except VocabularyError as e:
            raise VocabularyError(f"row {r}: {e}") from None
        if row_type != TYPE_NOTE:
            continue
        try:
            pitch = vocab.pitch_value(int(row[A_PITCH]))
            dur_slots = vocab.duration_value(int(row[A_DURATION]))
            velocity = vocab.velocity_value(int(row[A_VELOCITY]))
        except VocabularyError as e:
            raise VocabularyError(f"row {r}: {e}") from None
        dur_slots = min(dur_slots, SLOTS_PER_BAR - slot)
        notes.append(Note(pitch, slot * step, dur_slots * step, velocity))
    return Motif(
        bar_index=bar_index,
        notes=NoteSequence(notes=tuple(notes), ticks_per_quarter=ticks_per_quarter),
    )


def motif_tempo(tm: TokenMatrix, vocab: Vocabulary = VOCAB) -> float:
    """Tempo carried on the first valid row (120 for an empty matrix)."""
    if tm.valid_len == 0:
        return 120.0
    return vocab.tempo_value(int(tm.rows[0, A_TEMPO]))
