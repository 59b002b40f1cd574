"""Motif generation: exact rule branches for StR/TrR, model decode for the rest.

Strict and transpositional repetitions fix the pitch column by rule, so
classification of (input, output) is guaranteed to reproduce the requested
label. The other three types come entirely from the reconstruction decoder,
rounded and clamped into the vocabulary. The input's pad structure is always
preserved.
"""

from __future__ import annotations

import base64
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .midi_io import write_midi
from .notes import Note, NoteSequence, SLOTS_PER_BAR
from .rules import RepetitionType, TRAINABLE_TYPES
from .vocab import (
    A_DURATION,
    A_PITCH,
    A_POSITION,
    A_TYPE,
    A_VELOCITY,
    MAX_ROWS,
    NUM_ATTRIBUTES,
    PAD,
    TYPE_METRIC,
    TYPE_NOTE,
    TokenMatrix,
    VOCAB,
    detokenize,
    motif_tempo,
)

MAX_TRANSPOSE = 24
DEFAULT_TRANSPOSE = -2

_RULE_TYPES = (RepetitionType.STRICT, RepetitionType.TRANSPOSITIONAL)


@dataclass(frozen=True)
class GenerationRequest:
    motif: TokenMatrix
    labels: tuple[RepetitionType, ...]
    t: tuple[int | None, ...] | None = None  # per-label transposition amounts
    seed: int = 0
    chaining: bool = True

    def __post_init__(self) -> None:
        if not self.labels:
            raise ValueError("labels must be non-empty")
        for label in self.labels:
            if label not in TRAINABLE_TYPES:
                raise ValueError(f"cannot generate label {label}")
        if self.t is not None:
            if len(self.t) != len(self.labels):
                raise ValueError("t must align with labels")
            for value in self.t:
                if value is not None and not (value != 0 and abs(value) <= MAX_TRANSPOSE):
                    raise ValueError(f"transposition {value} must be nonzero, |t| <= {MAX_TRANSPOSE}")

    def t_for(self, index: int) -> int | None:
        return self.t[index] if self.t is not None else None

    def to_json_dict(self) -> dict:
        return {
            "motif": self.motif.to_json_dict(),
            "labels": [l.value for l in self.labels],
            "t": list(self.t) if self.t is not None else None,
            "seed": self.seed,
            "chaining": self.chaining,
        }


@dataclass(frozen=True)
class Piece:
    """Input motif plus its generated repetitions, in order."""

    motifs: tuple[tuple[TokenMatrix, RepetitionType | None], ...]
    provenance: GenerationRequest

    def __post_init__(self) -> None:
        if len(self.motifs) != len(self.provenance.labels) + 1:
            raise ValueError("a piece holds the input motif plus one motif per label")

    def to_json_dict(self) -> dict:
        return {
            "motifs": [
                tm.to_json_dict(label=label.value if label else None)
                for tm, label in self.motifs
            ],
            "provenance": self.provenance.to_json_dict(),
        }


def _clamp_round(values: np.ndarray, attribute: int) -> np.ndarray:
    hi = VOCAB.sizes[attribute] - 1
    return np.clip(np.rint(values).astype(np.int64), 1, hi)


def _sanitize(rows: np.ndarray, valid_len: int) -> TokenMatrix:
    """Make a rounded decode structurally valid: metric rows carry no note
    attributes, note durations stay inside the bar, pads stay zero."""
    out = np.zeros((MAX_ROWS, NUM_ATTRIBUTES), dtype=np.int64)
    out[:valid_len] = rows[:valid_len]
    for r in range(valid_len):
        row_type = out[r, A_TYPE]
        row_type = TYPE_NOTE if row_type <= TYPE_NOTE else TYPE_METRIC
        out[r, A_TYPE] = row_type
        slot = out[r, A_POSITION] - 1
        if row_type == TYPE_METRIC:
            out[r, A_PITCH] = PAD
            out[r, A_DURATION] = PAD
            out[r, A_VELOCITY] = PAD
        else:
            out[r, A_DURATION] = min(out[r, A_DURATION], SLOTS_PER_BAR - slot)
    return TokenMatrix(rows=out, valid_len=valid_len)


def _decode_rounded(model, motif: TokenMatrix, label: RepetitionType) -> np.ndarray:
    """Model regression output, rounded and clamped per attribute vocabulary."""
    from .model.training import decode_tokens

    pred = decode_tokens(model, motif, label)
    rows = np.zeros((MAX_ROWS, NUM_ATTRIBUTES), dtype=np.int64)
    n = min(MAX_ROWS, pred.shape[0])
    for k in range(NUM_ATTRIBUTES):
        rows[:n, k] = _clamp_round(pred[:n, k], k)
    return rows


def generate_one(
    motif: TokenMatrix,
    label: RepetitionType,
    model=None,
    t: int | None = None,
    seed: int = 0,
) -> TokenMatrix:
    """One generated repetition of `motif` under `label`.

    StR/TrR fix the pitch column by rule on the input's structural skeleton
    (type and position columns preserved); the remaining attribute columns
    come from the model decode when a model is loaded, otherwise they are
    copied from the input. SuR/HoR/SyR require the model.
    """
    if motif.valid_len == 0:
        raise ValueError("cannot generate from an empty motif")
    if label not in TRAINABLE_TYPES:
        raise ValueError(f"cannot generate label {label}")

    if label in _RULE_TYPES:
        if model is not None:
            rows = _decode_rounded(model, motif, label)
            # structural skeleton always comes from the input
            rows[:, A_TYPE] = motif.rows[:, A_TYPE]
            rows[:, A_POSITION] = motif.rows[:, A_POSITION]
        else:
            rows = motif.rows.copy()
        pitch = motif.rows[:, A_PITCH].copy()
        if label == RepetitionType.TRANSPOSITIONAL:
            # the skyline melody feeds the TrR check, and held-note durations
            # steer the skyline, so the rhythm must survive verbatim
            rows[:, A_DURATION] = motif.rows[:, A_DURATION]
            if t is None:
                t = DEFAULT_TRANSPOSE
            if t == 0 or abs(t) > MAX_TRANSPOSE:
                raise ValueError(f"transposition {t} must be nonzero, |t| <= {MAX_TRANSPOSE}")
            note_rows = motif.rows[:, A_TYPE] == TYPE_NOTE
            shifted = pitch[note_rows] + t
            clamped = np.clip(shifted, 1, 128)
            if (clamped != shifted).any():
                warnings.warn(
                    f"{int((clamped != shifted).sum())} pitch(es) clamped to the "
                    "MIDI range; the result may no longer classify as TrR",
                    stacklevel=2,
                )
            pitch[note_rows] = clamped
        rows[:, A_PITCH] = pitch
        return _sanitize(rows, motif.valid_len)

    if model is None:
        raise ValueError(f"{label.value} generation requires a trained model")
    rows = _decode_rounded(model, motif, label)
    return _sanitize(rows, motif.valid_len)


def generate_piece(request: GenerationRequest, model=None) -> Piece:
    """Apply the label list in order; with chaining, each output feeds the next step."""
    motifs: list[tuple[TokenMatrix, RepetitionType | None]] = [(request.motif, None)]
    current = request.motif
    for i, label in enumerate(request.labels):
        out = generate_one(current, label, model=model, t=request.t_for(i), seed=request.seed)
        motifs.append((out, label))
        if request.chaining:
            current = out
    return Piece(motifs=tuple(motifs), provenance=request)


def piece_to_sequence(piece: Piece, ticks_per_quarter: int = 480) -> NoteSequence:
    """Lay the piece out bar by bar at the input motif's tempo."""
    if not piece.motifs:
        raise ValueError("empty piece")
    bar_ticks = ticks_per_quarter * 4
    notes: list[Note] = []
    for i, (tm, _) in enumerate(piece.motifs):
        bar = detokenize(tm, ticks_per_quarter=ticks_per_quarter, bar_index=i)
        for n in bar.notes.notes:
            notes.append(Note(n.pitch, n.onset + i * bar_ticks, n.duration, n.velocity))
    if not notes:
        raise ValueError("piece contains no notes")
    tempo = motif_tempo(piece.motifs[0][0])
    return NoteSequence(
        notes=tuple(notes),
        ticks_per_quarter=ticks_per_quarter,
        tempo_events=((0, tempo),),
    )


def render_midi(piece: Piece, path: str | Path | None = None) -> bytes:
    """Serialize the piece as a format-0 MIDI file; returns the bytes."""
    data = write_midi(piece_to_sequence(piece))
    if path is not None:
        Path(path).write_bytes(data)
    return data


def render_midi_base64(piece: Piece) -> str:
    return base64.b64encode(render_midi(piece)).decode("ascii")


def write_piece_json(piece: Piece, path: str | Path) -> None:
    Path(path).write_text(json.dumps(piece.to_json_dict(), indent=2))
