from __future__ import annotations

import pytest

from motifrep.notes import Motif, Note, NoteSequence

TPQ = 480
SLOT = TPQ // 4


def make_motif(pitches, slots=None, durations=None, velocities=None, bar_index=0):
    """A quantized one-bar motif from parallel per-note attribute lists."""
    n = len(pitches)
    if slots is None:
        slots = list(range(n))
    if durations is None:
        durations = [1] * n
    if velocities is None:
        velocities = [66] * n
    notes = tuple(
        Note(p, s * SLOT, d * SLOT, v)
        for p, s, d, v in zip(pitches, slots, durations, velocities)
    )
    return Motif(bar_index, NoteSequence(notes=notes, ticks_per_quarter=TPQ))


@pytest.fixture
def fate_motif():
    # G-G-G-Eb, three short notes then a long one
    return make_motif([67, 67, 67, 63], slots=[0, 1, 2, 3], durations=[1, 1, 1, 8])
