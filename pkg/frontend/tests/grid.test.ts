import { describe, expect, it } from 'vitest';

import {
  addNote,
  fatePreset,
  fromWireMotif,
  noteAt,
  removeNoteAt,
  snapNote,
  tempoToken,
  toWireMotif,
  velocityFromToken,
  velocityToken,
  wireTempo,
} from '../src/grid.js';
import { COL, GridNote, MAX_ROWS, TYPE_METRIC, TYPE_NOTE } from '../src/types.js';

describe('token helpers', () => {
  it('velocity tokens round-trip on canonical values', () => {
    for (let tok = 1; tok <= 32; tok++) {
      expect(velocityToken(velocityFromToken(tok))).toBe(tok);
    }
  });

  it('tempo token matches the service bins', () => {
    expect(tempoToken(32)).toBe(1);
    expect(tempoToken(120)).toBe(1 + Math.round((120 - 32) / 3));
    expect(tempoToken(999)).toBe(64);
  });
});

describe('grid editing', () => {
  it('snaps onto the legal grid and clamps durations to the bar', () => {
    const snapped = snapNote({ pitch: 200, slot: 14, duration: 9, velocity: 999 });
    expect(snapped).toEqual({ pitch: 127, slot: 14, duration: 2, velocity: 126 });
  });

  it('replaces a note drawn on the same cell', () => {
    let notes: GridNote[] = [];
    notes = addNote(notes, { pitch: 60, slot: 0, duration: 2, velocity: 80 });
    notes = addNote(notes, { pitch: 60, slot: 0, duration: 4, velocity: 80 });
    expect(notes).toHaveLength(1);
    expect(notes[0].duration).toBe(4);
  });

  it('shortens an overlapping earlier note of the same pitch', () => {
    let notes: GridNote[] = [];
    notes = addNote(notes, { pitch: 60, slot: 0, duration: 8, velocity: 80 });
    notes = addNote(notes, { pitch: 60, slot: 4, duration: 2, velocity: 80 });
    expect(notes).toEqual([
      { pitch: 60, slot: 0, duration: 4, velocity: 82 },
      { pitch: 60, slot: 4, duration: 2, velocity: 82 },
    ]);
  });

  it('removes by any covered slot', () => {
    const notes = addNote([], { pitch: 60, slot: 2, duration: 4, velocity: 80 });
    expect(removeNoteAt(notes, 60, 4)).toHaveLength(0);
    expect(noteAt(notes, 60, 5)).toBeDefined();
    expect(noteAt(notes, 60, 6)).toBeUndefined();
  });
});

describe('wire conversion', () => {
  it('emits one metric row per occupied slot, then note rows', () => {
    const wire = toWireMotif(fatePreset(), 108);
    expect(wire.valid_len).toBe(8); // 4 slots: metric+note each
    expect(wire.rows).toHaveLength(MAX_ROWS);
    expect(wire.rows[0][COL.type]).toBe(TYPE_METRIC);
    expect(wire.rows[1][COL.type]).toBe(TYPE_NOTE);
    expect(wire.rows[1][COL.pitch]).toBe(1 + 67);
    expect(wire.rows[7][COL.pitch]).toBe(1 + 63);
    expect(wire.rows[7][COL.duration]).toBe(8);
    for (let r = wire.valid_len; r < MAX_ROWS; r++) {
      expect(wire.rows[r].every((v) => v === 0)).toBe(true);
    }
  });

  it('round-trips the note list exactly', () => {
    const notes = [
      { pitch: 60, slot: 0, duration: 2, velocity: 82 },
      { pitch: 64, slot: 0, duration: 2, velocity: 82 },
      { pitch: 67, slot: 4, duration: 4, velocity: 98 },
      { pitch: 59, slot: 12, duration: 4, velocity: 30 },
    ];
    const wire = toWireMotif(notes, 120);
    expect(fromWireMotif(wire)).toEqual(notes);
    expect(wireTempo(wire)).toBe(119); // nearest 3-bpm bin to 120
  });

  it('chord column stays "no chord" and positions are 1-based', () => {
    const wire = toWireMotif([{ pitch: 50, slot: 15, duration: 1, velocity: 82 }], 120);
    expect(wire.rows[0][COL.chord]).toBe(1);
    expect(wire.rows[0][COL.position]).toBe(16);
  });
});
