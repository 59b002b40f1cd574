"""Per-slot chord labels from sounding pitch classes, by template matching.

The corpus this engine was designed around ships chord annotations; raw
MIDI does not, so we label each sixteenth slot with the best-scoring
root/quality template over the pitch classes sounding in that slot.
"""

from __future__ import annotations

from .notes import Motif, SLOTS_PER_BAR
from .vocab import CHORD_QUALITIES, NO_CHORD, PITCH_CLASS_NAMES

_QUALITY_TEMPLATES: dict[str, frozenset[int]] = {
    "maj": frozenset({0, 4, 7}),
    "min": frozenset({0, 3, 7}),
    "dim": frozenset({0, 3, 6}),
    "aug": frozenset({0, 4, 8}),
    "maj7": frozenset({0, 4, 7, 11}),
    "min7": frozenset({0, 3, 7, 10}),
    "dom7": frozenset({0, 4, 7, 10}),
    "sus2": frozenset({0, 2, 7}),
    "sus4": frozenset({0, 5, 7}),
}

# A label needs at least this score; a bare dyad or single pitch stays "N".
_MIN_SCORE = 2.5


def _best_label(pcs: frozenset[int]) -> str:
    if len(pcs) < 3:
        return NO_CHORD
    best = (float("-inf"), 0, 0)
    for root in range(12):
        rooted = frozenset((pc - root) % 12 for pc in pcs)
        if 0 not in rooted:
            continue
        for qi, quality in enumerate(CHORD_QUALITIES):
            template = _QUALITY_TEMPLATES[quality]
            matched = len(template & rooted)
            extra = len(rooted - template)
            score = matched - 0.5 * extra
            # higher score wins; ties fall to the lower root, then quality order
            if score > best[0] or (score == best[0] and (root, qi) < best[1:]):
                best = (score, root, qi)
    if best[0] < _MIN_SCORE:
        return NO_CHORD
    return f"{PITCH_CLASS_NAMES[best[1]]}:{CHORD_QUALITIES[best[2]]}"


def slot_chords(motif: Motif) -> list[str]:
    """One chord label per sixteenth slot of the bar."""
    step = motif.notes.ticks_per_slot
    labels = []
    for slot in range(SLOTS_PER_BAR):
        lo, hi = slot * step, (slot + 1) * step
        pcs = frozenset(
            n.pitch % 12 for n in motif.notes.notes if n.onset < hi and n.end > lo
        )
        labels.append(_best_label(pcs))
    return labels
