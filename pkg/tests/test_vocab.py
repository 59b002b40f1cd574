from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from motifrep.notes import Motif, Note, NoteSequence
from motifrep.vocab import (
    A_PITCH,
    A_TYPE,
    MAX_ROWS,
    NUM_ATTRIBUTES,
    PAD,
    TYPE_METRIC,
    TYPE_NOTE,
    TokenMatrix,
    VOCAB,
    VocabularyError,
    detokenize,
    motif_tempo,
    tokenize,
)

from conftest import SLOT, TPQ, make_motif


class TestVocabularyTables:
    def test_sizes(self):
        assert VOCAB.sizes == (65, 110, 17, 4, 129, 33, 33)

    def test_pitch_bijection(self):
        for p in range(128):
            assert VOCAB.pitch_value(VOCAB.pitch_token(p)) == p

    def test_position_bijection(self):
        for s in range(16):
            assert VOCAB.position_value(VOCAB.position_token(s)) == s

    def test_velocity_canonical_round_trip(self):
        for tok in range(1, 33):
            v = VOCAB.velocity_value(tok)
            assert VOCAB.velocity_token(v) == tok

    def test_tempo_canonical_round_trip(self):
        for tok in range(1, 65):
            bpm = VOCAB.tempo_value(tok)
            assert VOCAB.tempo_token(bpm) == tok

    def test_chord_bijection(self):
        seen = set()
        for tok in range(1, 110):
            label = VOCAB.chord_value(tok)
            seen.add(label)
            assert VOCAB.chord_token(label) == tok
        assert len(seen) == 109

    def test_out_of_range_token_raises(self):
        with pytest.raises(VocabularyError):
            VOCAB.pitch_value(129)
        with pytest.raises(VocabularyError):
            VOCAB.pitch_value(0)


class TestTokenMatrixInvariants:
    def test_pad_discipline_enforced(self):
        rows = np.zeros((MAX_ROWS, NUM_ATTRIBUTES), dtype=np.int64)
        rows[0] = [1, 1, 1, TYPE_METRIC, 0, 0, 0]
        rows[5] = [1, 1, 1, TYPE_NOTE, 61, 4, 16]  # beyond valid_len
        with pytest.raises(ValueError, match="pad rows"):
            TokenMatrix(rows=rows, valid_len=1)

    def test_valid_rows_need_nonpad_type(self):
        rows = np.zeros((MAX_ROWS, NUM_ATTRIBUTES), dtype=np.int64)
        with pytest.raises(ValueError, match="non-pad type"):
            TokenMatrix(rows=rows, valid_len=1)

    def test_json_round_trip(self):
        tm = tokenize(make_motif([60, 64], slots=[0, 0]))
        back = TokenMatrix.from_json_dict(tm.to_json_dict())
        assert back == tm


class TestTokenize:
    def test_empty_motif_all_pad(self):
        m = Motif(0, NoteSequence(ticks_per_quarter=TPQ))
        tm = tokenize(m)
        assert tm.valid_len == 0
        assert not tm.rows.any()

    def test_one_note_gives_metric_plus_note_row(self):
        # hand-constructed encoding: metric row then note row, per vocabulary
        m = make_motif([60], slots=[0], durations=[2], velocities=[66])
        tm = tokenize(m, tempo=120.0, chords=["C:maj"] + ["N"] * 15)
        assert tm.valid_len == 2
        expected_metric = [
            VOCAB.tempo_token(120.0),
            VOCAB.chord_token("C:maj"),
            VOCAB.position_token(0),
            TYPE_METRIC,
            PAD,
            PAD,
            PAD,
        ]
        expected_note = [
            VOCAB.tempo_token(120.0),
            VOCAB.chord_token("C:maj"),
            VOCAB.position_token(0),
            TYPE_NOTE,
            VOCAB.pitch_token(60),
            VOCAB.duration_token(2),
            VOCAB.velocity_token(66),
        ]
        assert tm.rows[0].tolist() == expected_metric
        assert tm.rows[1].tolist() == expected_note

    def test_truncation_warns_with_count(self):
        notes = tuple(
            Note(30 + i % 60, (i % 16) * SLOT, SLOT, 66) for i in range(130)
        )
        m = Motif(0, NoteSequence(notes=notes, ticks_per_quarter=TPQ))
        with pytest.warns(UserWarning, match="truncated 26"):
            tm = tokenize(m)
        assert tm.valid_len == MAX_ROWS

    def test_tempo_recoverable(self):
        tm = tokenize(make_motif([60]), tempo=95.0)
        assert motif_tempo(tm) == pytest.approx(95.0)


class TestDetokenize:
    def test_out_of_vocabulary_pitch_names_row_and_attribute(self):
        tm = tokenize(make_motif([60], slots=[0]))
        rows = tm.rows.copy()
        rows[1, A_PITCH] = 200
        bad = TokenMatrix.__new__(TokenMatrix)
        object.__setattr__(bad, "rows", rows)
        object.__setattr__(bad, "valid_len", tm.valid_len)
        with pytest.raises(VocabularyError, match=r"row 1: token 200.*pitch"):
            detokenize(bad)

    def test_bad_type_token_rejected(self):
        rows = np.zeros((MAX_ROWS, NUM_ATTRIBUTES), dtype=np.int64)
        rows[0] = [1, 1, 1, TYPE_METRIC, 0, 0, 0]
        tm = TokenMatrix(rows=rows, valid_len=1)
        rows2 = tm.rows.copy()
        rows2[0, A_TYPE] = 9
        bad = TokenMatrix.__new__(TokenMatrix)
        object.__setattr__(bad, "rows", rows2)
        object.__setattr__(bad, "valid_len", 1)
        with pytest.raises(VocabularyError, match="type"):
            detokenize(bad)


def quantized_motifs():
    note = st.tuples(
        st.integers(0, 127),  # pitch
        st.integers(0, 15),  # slot
        st.integers(1, 16),  # duration slots (clipped to bar)
        st.sampled_from([2, 30, 66, 126]),  # canonical velocities
    )
    return st.lists(note, min_size=0, max_size=20).map(
        lambda raw: Motif(
            0,
            NoteSequence(
                notes=tuple(
                    Note(p, s * SLOT, min(d, 16 - s) * SLOT, v) for p, s, d, v in raw
                ),
                ticks_per_quarter=TPQ,
            ),
        )
    )


class TestRoundTrip:
    @given(quantized_motifs())
    @settings(max_examples=200, deadline=None)
    def test_detokenize_tokenize_reproduces_note_multiset(self, m):
        tm = tokenize(m, tempo=120.0)
        back = detokenize(tm, ticks_per_quarter=TPQ)
        original = sorted((n.pitch, n.onset, n.duration, n.velocity) for n in m.notes.notes)
        recovered = sorted((n.pitch, n.onset, n.duration, n.velocity) for n in back.notes.notes)
        assert recovered == original

    @given(quantized_motifs())
    @settings(max_examples=100, deadline=None)
    def test_pad_discipline(self, m):
        tm = tokenize(m)
        assert not tm.rows[tm.valid_len :].any()
        assert (tm.rows[: tm.valid_len, A_TYPE] != PAD).all()
