"""Core symbolic-music types: notes, sequences, and one-bar motifs.

Everything downstream (classification, tokenization, the model) works on
these value types. All pieces are assumed to be in 4/4; a bar is a grid of
16 sixteenth-note slots.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

SLOTS_PER_BAR = 16
BEATS_PER_BAR = 4
DEFAULT_TICKS_PER_QUARTER = 480
DEFAULT_BPM = 120.0

# Velocities representable by the 32-bin token vocabulary: 2, 6, ..., 126.
VELOCITY_BINS = tuple(4 * i + 2 for i in range(32))


class EmptyMotifError(ValueError):
    """Raised when an operation requires a motif with at least one note."""


@dataclass(frozen=True, slots=True)
class Note:
    """A pitched event. Times are integer ticks from the piece (or bar) start."""

    pitch: int
    onset: int
    duration: int
    velocity: int

    def __post_init__(self) -> None:
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch {self.pitch} outside [0, 127]")
        if self.onset < 0:
            raise ValueError(f"onset {self.onset} is negative")
        if self.duration < 1:
            raise ValueError(f"duration {self.duration} < 1 tick")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity {self.velocity} outside [1, 127]")

    @property
    def end(self) -> int:
        return self.onset + self.duration

    def sort_key(self) -> tuple[int, int, int, int]:
        return (self.onset, self.pitch, self.duration, self.velocity)


def _sorted_notes(notes) -> tuple[Note, ...]:
    return tuple(sorted(notes, key=Note.sort_key))


@dataclass(frozen=True, slots=True)
class NoteSequence:
    """An ordered run of notes with tick resolution and a tempo map.

    Notes stay sorted by (onset, pitch); the time signature is fixed 4/4.
    tempo_events holds (tick, bpm) pairs sorted by tick.
    """

    notes: tuple[Note, ...] = ()
    ticks_per_quarter: int = DEFAULT_TICKS_PER_QUARTER
    tempo_events: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        if self.ticks_per_quarter <= 0:
            raise ValueError("ticks_per_quarter must be positive")
        object.__setattr__(self, "notes", _sorted_notes(self.notes))
        object.__setattr__(self, "tempo_events", tuple(sorted(self.tempo_events)))

    def __len__(self) -> int:
        return len(self.notes)

    @property
    def ticks_per_slot(self) -> int:
        # 16 slots over 4 quarters
        return max(1, self.ticks_per_quarter // 4)

    @property
    def ticks_per_bar(self) -> int:
        return self.ticks_per_quarter * BEATS_PER_BAR

    def tempo_at(self, tick: int) -> float:
        """bpm of the last tempo event at or before `tick` (default 120)."""
        bpm = DEFAULT_BPM
        for ev_tick, ev_bpm in self.tempo_events:
            if ev_tick > tick:
                break
            bpm = ev_bpm
        return bpm


@dataclass(frozen=True, slots=True)
class Motif:
    """One bar of music. Note onsets are ticks relative to the bar start."""

    bar_index: int
    notes: NoteSequence

    def __post_init__(self) -> None:
        if self.bar_index < 0:
            raise ValueError("bar_index must be >= 0")
        bar_ticks = self.notes.ticks_per_bar
        for n in self.notes.notes:
            if n.onset >= bar_ticks or n.end > bar_ticks:
                raise ValueError(
                    f"note {n} does not lie within a {bar_ticks}-tick bar"
                )

    def __len__(self) -> int:
        return len(self.notes)

    @property
    def melody(self) -> tuple[int, ...]:
        """Skyline melody; empty for an empty motif."""
        if not self.notes.notes:
            return ()
        return extract_melody(self)

    @property
    def pitches(self) -> tuple[int, ...]:
        """Full pitch sequence in (onset, pitch) order."""
        return tuple(n.pitch for n in self.notes.notes)


def snap_velocity(velocity: int) -> int:
    """Project a MIDI velocity onto the 32-value vocabulary lattice."""
    idx = min(31, max(0, int(round((velocity - 2) / 4))))
    return VELOCITY_BINS[idx]


def quantize(seq: NoteSequence) -> NoteSequence:
    """Snap onsets/durations to the sixteenth grid and velocities to the vocabulary.

    Onsets round to the nearest slot line (ties go up); durations round the
    same way and clamp to at least one slot. Velocity snapping keeps
    tokenize/detokenize an exact round trip on quantized material.
    """
    step = seq.ticks_per_slot
    out = []
    for n in seq.notes:
        onset_slot = int((n.onset / step) + 0.5)
        dur_slots = max(1, int((n.duration / step) + 0.5))
        out.append(
            Note(
                pitch=n.pitch,
                onset=onset_slot * step,
                duration=dur_slots * step,
                velocity=snap_velocity(n.velocity),
            )
        )
    return replace(seq, notes=tuple(out))


def segment_bars(seq: NoteSequence) -> list[Motif]:
    """Split a quantized sequence into one Motif per non-empty bar.

    Notes crossing a barline are split at the line; both halves keep pitch
    and velocity. Empty bars produce no motif, but bar_index keeps counting.
    """
    bar_ticks = seq.ticks_per_bar
    by_bar: dict[int, list[Note]] = {}
    for n in seq.notes:
        onset, remaining = n.onset, n.duration
        while remaining > 0:
            bar = onset // bar_ticks
            bar_end = (bar + 1) * bar_ticks
            span = min(remaining, bar_end - onset)
            by_bar.setdefault(bar, []).append(
                Note(n.pitch, onset - bar * bar_ticks, span, n.velocity)
            )
            onset += span
            remaining -= span
    motifs = []
    for bar in sorted(by_bar):
        notes = NoteSequence(
            notes=tuple(by_bar[bar]),
            ticks_per_quarter=seq.ticks_per_quarter,
        )
        motifs.append(Motif(bar_index=bar, notes=notes))
    return motifs


def extract_melody(motif: Motif) -> tuple[int, ...]:
    """Skyline rule: the highest sounding pitch at each distinct onset."""
    notes = motif.notes.notes
    if not notes:
        raise EmptyMotifError("cannot extract a melody from an empty motif")
    onsets = sorted({n.onset for n in notes})
    melody = []
    for t in onsets:
        sounding = [n.pitch for n in notes if n.onset <= t < n.end]
        melody.append(max(sounding))
    return tuple(melody)


def shift(motif: Motif, semitones: int) -> Motif:
    """Transpose every note chromatically; pitches must stay in [0, 127]."""
    moved = tuple(
        Note(n.pitch + semitones, n.onset, n.duration, n.velocity)
        for n in motif.notes.notes
    )
    return Motif(motif.bar_index, replace(motif.notes, notes=moved))


def concat_motifs(
    motifs, ticks_per_quarter: int = DEFAULT_TICKS_PER_QUARTER, bpm: float = DEFAULT_BPM
) -> NoteSequence:
    """Lay motifs out bar after bar into a single sequence."""
    bar_ticks = ticks_per_quarter * BEATS_PER_BAR
    notes = []
    for i, m in enumerate(motifs):
        for n in m.notes.notes:
            notes.append(Note(n.pitch, n.onset + i * bar_ticks, n.duration, n.velocity))
    return NoteSequence(
        notes=tuple(notes),
        ticks_per_quarter=ticks_per_quarter,
        tempo_events=((0, bpm),),
    )
