/** Piano-roll grid model and its conversion to the service's motif schema.
 *
 * The encoding mirrors the service: one metric row per occupied slot
 * followed by one note row per note, token 0 as pad everywhere. No music
 * theory happens here; labels always come from the service.
 */

import {
  COL,
  GridNote,
  MAX_ROWS,
  NUM_ATTRIBUTES,
  SLOTS_PER_BAR,
  TYPE_METRIC,
  TYPE_NOTE,
  WireMotif,
} from './types.js';

const TEMPO_BASE = 32; // bpm of tempo token 1; 3-bpm bins, 64 of them
const NO_CHORD_TOKEN = 1;

export function tempoToken(bpm: number): number {
  const idx = Math.round((bpm - TEMPO_BASE) / 3);
  return 1 + Math.min(63, Math.max(0, idx));
}

export function velocityToken(velocity: number): number {
  const idx = Math.round((velocity - 2) / 4);
  return 1 + Math.min(31, Math.max(0, idx));
}

export function velocityFromToken(token: number): number {
  return 4 * (token - 1) + 2;
}

/** Clamp and snap a candidate note onto the legal grid. */
export function snapNote(note: GridNote): GridNote {
  const slot = Math.min(SLOTS_PER_BAR - 1, Math.max(0, Math.round(note.slot)));
  return {
    pitch: Math.min(127, Math.max(0, Math.round(note.pitch))),
    slot,
    duration: Math.min(SLOTS_PER_BAR - slot, Math.max(1, Math.round(note.duration))),
    velocity: velocityFromToken(velocityToken(note.velocity)),
  };
}

/** Add a note; a note at the same (pitch, slot) is replaced, and overlaps
 * with the same pitch are shortened so the new onset stays audible. */
export function addNote(notes: GridNote[], raw: GridNote): GridNote[] {
  const note = snapNote(raw);
  const out: GridNote[] = [];
  for (const n of notes) {
    if (n.pitch === note.pitch && n.slot === note.slot) continue;
    if (n.pitch === note.pitch && n.slot < note.slot && n.slot + n.duration > note.slot) {
      out.push({ ...n, duration: note.slot - n.slot });
      continue;
    }
    out.push(n);
  }
  out.push(note);
  return sortNotes(out);
}

export function removeNoteAt(notes: GridNote[], pitch: number, slot: number): GridNote[] {
  return notes.filter((n) => !(n.pitch === pitch && slot >= n.slot && slot < n.slot + n.duration));
}

export function noteAt(notes: GridNote[], pitch: number, slot: number): GridNote | undefined {
  return notes.find((n) => n.pitch === pitch && slot >= n.slot && slot < n.slot + n.duration);
}

export function sortNotes(notes: GridNote[]): GridNote[] {
  return [...notes].sort(
    (a, b) => a.slot - b.slot || a.pitch - b.pitch || a.duration - b.duration
  );
}

export function toWireMotif(notes: GridNote[], bpm: number): WireMotif {
  const sorted = sortNotes(notes.map(snapNote));
  const rows: number[][] = [];
  const tempo = tempoToken(bpm);
  let lastSlot = -1;
  for (const n of sorted) {
    if (n.slot !== lastSlot) {
      rows.push([tempo, NO_CHORD_TOKEN, 1 + n.slot, TYPE_METRIC, 0, 0, 0]);
      lastSlot = n.slot;
    }
    rows.push([
      tempo,
      NO_CHORD_TOKEN,
      1 + n.slot,
      TYPE_NOTE,
      1 + n.pitch,
      n.duration,
      velocityToken(n.velocity),
    ]);
  }
  const matrix: number[][] = [];
  for (let r = 0; r < MAX_ROWS; r++) {
    matrix.push(r < rows.length ? rows[r] : new Array(NUM_ATTRIBUTES).fill(0));
  }
  return { valid_len: rows.length, rows: matrix };
}

export function fromWireMotif(wire: WireMotif): GridNote[] {
  const notes: GridNote[] = [];
  for (let r = 0; r < wire.valid_len; r++) {
    const row = wire.rows[r];
    if (row[COL.type] !== TYPE_NOTE) continue;
    const slot = row[COL.position] - 1;
    notes.push({
      pitch: row[COL.pitch] - 1,
      slot,
      duration: Math.min(row[COL.duration], SLOTS_PER_BAR - slot),
      velocity: velocityFromToken(row[COL.velocity]),
    });
  }
  return sortNotes(notes);
}

export function wireTempo(wire: WireMotif): number {
  if (wire.valid_len === 0) return 120;
  return TEMPO_BASE + 3 * (wire.rows[0][COL.tempo] - 1);
}

/** The famous four-note opening of Beethoven's Fifth: G4 G4 G4 Eb4. */
export function fatePreset(): GridNote[] {
  return [
    { pitch: 67, slot: 0, duration: 1, velocity: 82 },
    { pitch: 67, slot: 1, duration: 1, velocity: 82 },
    { pitch: 67, slot: 2, duration: 1, velocity: 82 },
    { pitch: 63, slot: 3, duration: 8, velocity: 98 },
  ];
}
