/** Session state and its pure transition function.
 *
 * Every mutation flows through reduce(), which never mutates its input, so
 * undo can restore the exact previous state by keeping the old references.
 * Generation responses carry a request token; a response whose token no
 * longer matches the in-flight token (the user edited or regenerated in
 * the meantime) is discarded.
 */

import { GridNote, StepVerdict, WireMotif } from './types.js';
import { addNote, fatePreset, fromWireMotif, removeNoteAt, sortNotes } from './grid.js';

export interface TimelineStep {
  motif: WireMotif;
  verdict: StepVerdict;
  t: number | null;
}

export interface SessionState {
  notes: GridNote[]; // the editor's current motif
  bpm: number;
  seed: number;
  chaining: boolean;
  endpoint: string;
  timeline: TimelineStep[];
  inFlight: number | null; // token of the one allowed pending request
  nextToken: number;
  lastError: string | null;
}

export interface HistoryState {
  present: SessionState;
  past: SessionState[];
}

export function initialState(endpoint = ''): SessionState {
  return {
    notes: [],
    bpm: 120,
    seed: 0,
    chaining: true,
    endpoint,
    timeline: [],
    inFlight: null,
    nextToken: 1,
    lastError: null,
  };
}

export function initialHistory(endpoint = ''): HistoryState {
  return { present: initialState(endpoint), past: [] };
}

export type Action =
  | { kind: 'add-note'; note: GridNote }
  | { kind: 'remove-note'; pitch: number; slot: number }
  | { kind: 'clear-grid' }
  | { kind: 'load-preset' }
  | { kind: 'import-motif'; motif: WireMotif }
  | { kind: 'set-bpm'; bpm: number }
  | { kind: 'set-seed'; seed: number }
  | { kind: 'set-chaining'; chaining: boolean }
  | { kind: 'begin-generate' }
  | { kind: 'generate-ok'; token: number; step: TimelineStep }
  | { kind: 'generate-failed'; token: number; message: string }
  | { kind: 'remove-step'; index: number }
  | { kind: 'reset-timeline' };

/** Actions that change what the next generation would see; they invalidate
 * any response still in flight. */
const EDITS = new Set([
  'add-note',
  'remove-note',
  'clear-grid',
  'load-preset',
  'import-motif',
  'set-seed',
  'set-chaining',
  'remove-step',
  'reset-timeline',
]);

export function reduce(state: SessionState, action: Action): SessionState {
  const next = apply(state, action);
  if (EDITS.has(action.kind) && next !== state) {
    return { ...next, inFlight: null };
  }
  return next;
}

function apply(state: SessionState, action: Action): SessionState {
  switch (action.kind) {
    case 'add-note':
      return { ...state, notes: addNote(state.notes, action.note), lastError: null };
    case 'remove-note':
      return { ...state, notes: removeNoteAt(state.notes, action.pitch, action.slot) };
    case 'clear-grid':
      return { ...state, notes: [] };
    case 'load-preset':
      return { ...state, notes: fatePreset(), bpm: 108 };
    case 'import-motif':
      return { ...state, notes: sortNotes(fromWireMotif(action.motif)) };
    case 'set-bpm':
      return { ...state, bpm: clamp(action.bpm, 32, 221) };
    case 'set-seed':
      return { ...state, seed: action.seed | 0 };
    case 'set-chaining':
      return { ...state, chaining: action.chaining };
    case 'begin-generate': {
      if (state.inFlight !== null || state.notes.length === 0) return state;
      return { ...state, inFlight: state.nextToken, nextToken: state.nextToken + 1 };
    }
    case 'generate-ok': {
      if (action.token !== state.inFlight) return state; // stale response
      const timeline = [...state.timeline, action.step];
      const notes = state.chaining ? fromWireMotif(action.step.motif) : state.notes;
      return { ...state, timeline, notes, inFlight: null, lastError: null };
    }
    case 'generate-failed': {
      if (action.token !== state.inFlight) return state;
      return { ...state, inFlight: null, lastError: action.message };
    }
    case 'remove-step':
      return { ...state, timeline: state.timeline.filter((_, i) => i !== action.index) };
    case 'reset-timeline':
      return { ...state, timeline: [] };
  }
}

function clamp(x: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, x));
}

// --- history wrapper -------------------------------------------------------

export function dispatch(history: HistoryState, action: Action): HistoryState {
  const next = reduce(history.present, action);
  if (next === history.present) return history;
  return { present: next, past: [...history.past, history.present] };
}

export function undo(history: HistoryState): HistoryState {
  if (history.past.length === 0) return history;
  return {
    present: history.past[history.past.length - 1],
    past: history.past.slice(0, -1),
  };
}

/** The motif the next generation step must start from: the last timeline
 * output when chaining, otherwise the editor content. Kept as an invariant
 * check rather than recomputed state. */
export function chainingInvariantHolds(state: SessionState): boolean {
  if (!state.chaining || state.timeline.length === 0) return true;
  const last = state.timeline[state.timeline.length - 1];
  const expected = JSON.stringify(sortNotes(fromWireMotif(last.motif)));
  return expected === JSON.stringify(sortNotes(state.notes));
}
