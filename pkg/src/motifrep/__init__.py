"""motifrep: a motif-level repetition engine for symbolic music.

Detects and labels five repetition types between one-bar motifs (strict,
transpositional, subsequential, homodirectional, symmetric), learns to
generate them with a multi-attribute transformer encoder trained jointly on
classification and repetition-weighted reconstruction, and guarantees the
strict/transpositional types exactly through rule-based generation.
"""

from .notes import (
    EmptyMotifError,
    Motif,
    Note,
    NoteSequence,
    concat_motifs,
    extract_melody,
    quantize,
    segment_bars,
    shift,
)
from .midi_io import MidiParseError, UnsupportedMeterError, parse_midi, parse_midi_file, write_midi, write_midi_file
from .vocab import (
    ATTRIBUTES,
    MAX_ROWS,
    NUM_ATTRIBUTES,
    TokenMatrix,
    VOCAB,
    Vocabulary,
    VocabularyError,
    detokenize,
    tokenize,
)
from .chords import slot_chords
from .rules import (
    Direction,
    Key,
    RepetitionLabel,
    RepetitionType,
    SymmetryKind,
    Transposition,
    TRAINABLE_TYPES,
    classify,
    development,
    infer_key,
    infer_pair_key,
    is_homodirectional,
    is_strict,
    is_subsequential,
    lcs_similarity,
    symmetry,
    transposition,
)

__version__ = "0.1.0"
