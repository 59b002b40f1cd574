"""The five repetition types on the motifs from Beethoven's Fifth.

Runs the classifier cascade over the famous worked examples: the fate motif
against its transposition, the shared-subsequence variant, the matching-
direction variant, and the three symmetry mirrors of E4-D4-E4-G4.
"""

from motifrep import Key, Note, NoteSequence, Motif, classify, development

TPQ = 480
SLOT = TPQ // 4


def motif(pitches, durations=None):
    durations = durations or [1] * len(pitches)
    notes, t = [], 0
    for p, d in zip(pitches, durations):
        notes.append(Note(p, t * SLOT, d * SLOT, 80))
        t += d
    return Motif(0, NoteSequence(notes=tuple(notes), ticks_per_quarter=TPQ))


c_minor = Key(0, "minor")
c_major = Key(0, "major")

fate = motif([67, 67, 67, 63], [1, 1, 1, 8])  # G G G Eb
pairs = [
    ("fate vs itself", fate, fate, c_minor),
    ("fate vs F-F-F-D (one scale degree down)", fate, motif([65, 65, 65, 62], [1, 1, 1, 8]), c_minor),
    ("fate vs G-G-G-D (three notes shared)", fate, motif([67, 67, 67, 62], [1, 1, 1, 8]), c_minor),
    ("fate vs Ab-Ab-Ab-G (same contour)", fate, motif([68, 68, 68, 67], [1, 1, 1, 8]), c_minor),
]

seed = motif([64, 62, 64, 67])  # E4 D4 E4 G4
print("development of E4-D4-E4-G4:", [d.value for d in development(seed.melody)])
pairs += [
    ("E4-D4-E4-G4 vs E4-F4-E4-C4 (directions flipped)", seed, motif([64, 65, 64, 60]), c_major),
    ("E4-D4-E4-G4 vs E4-F4-G4-F4 (directions reversed)", seed, motif([64, 65, 67, 65]), c_major),
    ("E4-D4-E4-G4 vs E4-D4-C4-A4 (flipped and reversed)", seed, motif([64, 62, 60, 69]), c_major),
    ("C4-D4-E4 vs C4-E4-G4 (HoR and SyR at once)", motif([60, 62, 64]), motif([60, 64, 67]), c_major),
]

for name, a, b, key in pairs:
    label = classify(a, b, key)
    detail = f" ({label.detail})" if label.detail else ""
    print(f"{name:55s} -> {label.variant.value}{detail}")
