"""From raw notes to compound tokens and back.

Builds one bar of the Beethoven fate motif, walks it through quantization,
melody extraction, and the 7-attribute token encoding, then shows that
detokenization restores the exact note multiset.
"""

from motifrep import Note, NoteSequence, quantize, segment_bars, extract_melody
from motifrep.chords import slot_chords
from motifrep.vocab import ATTRIBUTES, tokenize, detokenize

TPQ = 480
SLOT = TPQ // 4

# G-G-G-Eb: three short notes and a long one, all in one 4/4 bar
raw = NoteSequence(
    notes=(
        Note(67, 0, SLOT, 80),
        Note(67, SLOT, SLOT, 80),
        Note(67, 2 * SLOT, SLOT, 80),
        Note(63, 3 * SLOT, 8 * SLOT, 96),
    ),
    ticks_per_quarter=TPQ,
    tempo_events=((0, 120.0),),
)

seq = quantize(raw)
(motif,) = segment_bars(seq)
print("melody (skyline):", extract_melody(motif))

tm = tokenize(motif, tempo=120.0, chords=slot_chords(motif))
print(f"\ntoken matrix: {tm.valid_len} valid rows of 120, attributes {ATTRIBUTES}")
for r in range(tm.valid_len):
    print(" ", tm.rows[r].tolist())

back = detokenize(tm, ticks_per_quarter=TPQ)
assert sorted(n.sort_key() for n in back.notes.notes) == sorted(
    n.sort_key() for n in motif.notes.notes
)
print("\nround trip: detokenize(tokenize(m)) reproduced every note exactly")
