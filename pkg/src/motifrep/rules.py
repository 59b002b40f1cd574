"""The five motif-level repetition types as a deterministic, exclusive classifier.

Classification cascades: strict repetition (identical full pitch sequences),
then transpositional (constant chromatic or diatonic shift of the melody),
then subsequential (melodies sharing >= 75% as a common subsequence), then
homodirectional / symmetric repetition on the development (direction)
sequences. Pairs matching both of the last two are Ambiguous and excluded
from the trainable label space.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .notes import EmptyMotifError, Motif, NoteSequence

SIMILARITY_THRESHOLD = 0.75


class RepetitionType(Enum):
    STRICT = "StR"
    TRANSPOSITIONAL = "TrR"
    SUBSEQUENTIAL = "SuR"
    HOMODIRECTIONAL = "HoR"
    SYMMETRIC = "SyR"
    AMBIGUOUS = "Ambiguous"
    NONE = "None"

    def __str__(self) -> str:
        return self.value


TRAINABLE_TYPES = (
    RepetitionType.STRICT,
    RepetitionType.TRANSPOSITIONAL,
    RepetitionType.SUBSEQUENTIAL,
    RepetitionType.HOMODIRECTIONAL,
    RepetitionType.SYMMETRIC,
)
LABEL_INDEX = {t: i for i, t in enumerate(TRAINABLE_TYPES)}
NUM_CLASSES = len(TRAINABLE_TYPES)


def parse_type(token: str) -> RepetitionType:
    for t in RepetitionType:
        if t.value.lower() == token.lower():
            return t
    raise ValueError(f"unknown repetition type {token!r}")


class Direction(Enum):
    UP = "Up"
    DOWN = "Down"
    SAME = "Same"


_NEGATE = {Direction.UP: Direction.DOWN, Direction.DOWN: Direction.UP, Direction.SAME: Direction.SAME}


class SymmetryKind(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    ROTATIONAL = "rotational"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Transposition:
    kind: str  # "chromatic" | "diatonic"
    offset: int  # semitones or scale degrees, never 0

    def __str__(self) -> str:
        return f"{self.kind} {self.offset:+d}"


@dataclass(frozen=True)
class RepetitionLabel:
    variant: RepetitionType
    detail: Transposition | SymmetryKind | None = None


# ---------------------------------------------------------------------------
# development sequences

def development(melody) -> tuple[Direction, ...]:
    """Direction of the pitch sequence from one note to the next."""
    out = []
    for a, b in zip(melody, melody[1:]):
        if b > a:
            out.append(Direction.UP)
        elif b < a:
            out.append(Direction.DOWN)
        else:
            out.append(Direction.SAME)
    return tuple(out)


def negate_development(dev) -> tuple[Direction, ...]:
    return tuple(_NEGATE[d] for d in dev)


def reverse_development(dev) -> tuple[Direction, ...]:
    return tuple(reversed(dev))


# ---------------------------------------------------------------------------
# keys

MAJOR_STEPS = (0, 2, 4, 5, 7, 9, 11)
MINOR_STEPS = (0, 2, 3, 5, 7, 8, 10)

# Krumhansl-Kessler tonal hierarchy profiles.
_MAJOR_PROFILE = (6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88)
_MINOR_PROFILE = (6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17)


@dataclass(frozen=True)
class Key:
    tonic: int  # pitch class 0-11
    mode: str  # "major" | "minor"

    def __post_init__(self) -> None:
        if not 0 <= self.tonic <= 11:
            raise ValueError(f"tonic {self.tonic} outside [0, 11]")
        if self.mode not in ("major", "minor"):
            raise ValueError(f"mode must be major or minor, got {self.mode!r}")

    @property
    def scale(self) -> tuple[int, ...]:
        steps = MAJOR_STEPS if self.mode == "major" else MINOR_STEPS
        return tuple((self.tonic + s) % 12 for s in steps)

    def __str__(self) -> str:
        from .vocab import PITCH_CLASS_NAMES

        return f"{PITCH_CLASS_NAMES[self.tonic]}:{self.mode}"

    @classmethod
    def parse(cls, text: str) -> "Key":
        from .vocab import PITCH_CLASS_NAMES

        name, _, mode = text.partition(":")
        return cls(tonic=PITCH_CLASS_NAMES.index(name), mode=mode)


def _pearson(x, y) -> float:
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    dx = sum((a - mx) ** 2 for a in x) ** 0.5
    dy = sum((b - my) ** 2 for b in y) ** 0.5
    if dx == 0 or dy == 0:
        return 0.0
    return num / (dx * dy)


def infer_key(seq: NoteSequence) -> Key:
    """Best major/minor key by duration-weighted pitch-class profile correlation.

    Ties break toward the key whose tonic matches the final bass pitch class,
    then toward the lower tonic number, then major over minor.
    """
    if not seq.notes:
        raise EmptyMotifError("cannot infer a key from an empty sequence")
    weights = [0.0] * 12
    for n in seq.notes:
        weights[n.pitch % 12] += n.duration

    last_onset = max(n.onset for n in seq.notes)
    final_bass = min(n.pitch for n in seq.notes if n.onset == last_onset) % 12

    best_key: Key | None = None
    best_rank: tuple | None = None
    for tonic in range(12):
        for mode, profile in (("major", _MAJOR_PROFILE), ("minor", _MINOR_PROFILE)):
            rotated = [profile[(pc - tonic) % 12] for pc in range(12)]
            corr = _pearson(weights, rotated)
            rank = (-corr, 0 if tonic == final_bass else 1, tonic, 0 if mode == "major" else 1)
            if best_rank is None or rank < best_rank:
                best_rank = rank
                best_key = Key(tonic=tonic, mode=mode)
    assert best_key is not None
    return best_key


def degree_index(pitch: int, key: Key) -> int | None:
    """Absolute diatonic degree of a pitch, or None when out of scale.

    Degrees count scale members in ascending pitch-class order per octave, so
    a constant pitch-height shift inside the scale is a constant degree shift.
    """
    ordered = sorted(key.scale)
    pc = pitch % 12
    if pc not in ordered:
        return None
    return (pitch // 12) * 7 + ordered.index(pc)


# ---------------------------------------------------------------------------
# pairwise predicates

def lcs_length(p, q) -> int:
    """Classic dynamic-programming longest common subsequence length."""
    if not p or not q:
        return 0
    prev = [0] * (len(q) + 1)
    for a in p:
        cur = [0]
        for j, b in enumerate(q, 1):
            cur.append(prev[j - 1] + 1 if a == b else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def lcs_similarity(p, q) -> float:
    """LCS length over the longer sequence's length; 0 when either is empty."""
    if not p or not q:
        return 0.0
    return lcs_length(p, q) / max(len(p), len(q))


def is_strict(a: Motif, b: Motif) -> bool:
    """Full pitch sequences (all notes, not melody only) equal as ordered lists."""
    return a.pitches == b.pitches


def transposition(a: Motif, b: Motif, key: Key) -> Transposition | None:
    """Constant nonzero chromatic or diatonic shift between the two melodies."""
    ma, mb = a.melody, b.melody
    if len(ma) != len(mb) or not ma:
        return None
    diffs = {q - p for p, q in zip(ma, mb)}
    if len(diffs) == 1:
        t = diffs.pop()
        if t != 0:
            return Transposition("chromatic", t)
        return None
    da = [degree_index(p, key) for p in ma]
    db = [degree_index(p, key) for p in mb]
    if any(d is None for d in da) or any(d is None for d in db):
        return None
    degree_diffs = {q - p for p, q in zip(da, db)}
    if len(degree_diffs) == 1:
        t = degree_diffs.pop()
        if t != 0:
            return Transposition("diatonic", t)
    return None


def is_subsequential(a: Motif, b: Motif, threshold: float = SIMILARITY_THRESHOLD) -> bool:
    return lcs_similarity(a.melody, b.melody) >= threshold


def symmetry(
    a: Motif, b: Motif, threshold: float = SIMILARITY_THRESHOLD
) -> SymmetryKind | None:
    """First matching symmetry of the development sequences, if any.

    Horizontal mirrors direction (negate), vertical mirrors time (reverse),
    rotational does both. Checked in that order for reporting; the order
    never changes whether *some* symmetry holds.
    """
    da, db = development(a.melody), development(b.melody)
    checks = (
        (SymmetryKind.HORIZONTAL, negate_development(da)),
        (SymmetryKind.VERTICAL, reverse_development(da)),
        (SymmetryKind.ROTATIONAL, negate_development(reverse_development(da))),
    )
    for kind, transformed in checks:
        if lcs_similarity(transformed, db) >= threshold:
            return kind
    return None


def is_homodirectional(
    a: Motif, b: Motif, threshold: float = SIMILARITY_THRESHOLD
) -> bool:
    return lcs_similarity(development(a.melody), development(b.melody)) >= threshold


def classify(
    a: Motif, b: Motif, key: Key, threshold: float = SIMILARITY_THRESHOLD
) -> RepetitionLabel:
    """Exclusive cascade over the five repetition types.

    StR, else TrR, else SuR; then homodirectional and symmetric are checked
    together: both holding is Ambiguous (excluded from datasets), exactly one
    gives HoR or SyR, neither gives None.
    """
    if not a.notes.notes or not b.notes.notes:
        raise EmptyMotifError("classify requires two non-empty motifs")
    if is_strict(a, b):
        return RepetitionLabel(RepetitionType.STRICT)
    trans = transposition(a, b, key)
    if trans is not None:
        return RepetitionLabel(RepetitionType.TRANSPOSITIONAL, trans)
    if is_subsequential(a, b, threshold):
        return RepetitionLabel(RepetitionType.SUBSEQUENTIAL)
    homo = is_homodirectional(a, b, threshold)
    sym = symmetry(a, b, threshold)
    if homo and sym is not None:
        return RepetitionLabel(RepetitionType.AMBIGUOUS)
    if homo:
        return RepetitionLabel(RepetitionType.HOMODIRECTIONAL)
    if sym is not None:
        return RepetitionLabel(RepetitionType.SYMMETRIC, sym)
    return RepetitionLabel(RepetitionType.NONE)


def infer_pair_key(a: Motif, b: Motif) -> Key:
    """Key from the union of two motifs' notes, for song-less classification."""
    merged = NoteSequence(
        notes=a.notes.notes + b.notes.notes,
        ticks_per_quarter=a.notes.ticks_per_quarter,
    )
    return infer_key(merged)
