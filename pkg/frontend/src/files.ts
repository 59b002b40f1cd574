/** Import/export: MIDI download from the service render, lossless piece
 * JSON round trips, and motif JSON import (the ingest-compatible schema). */

import { SessionState, TimelineStep } from './state.js';
import { WireMotif } from './types.js';
import { toWireMotif } from './grid.js';

export interface PieceFile {
  format: 'motifrep-piece';
  version: 1;
  bpm: number;
  seed: number;
  chaining: boolean;
  input: WireMotif;
  steps: TimelineStep[];
}

export function exportPiece(state: SessionState, input: WireMotif): PieceFile {
  return {
    format: 'motifrep-piece',
    version: 1,
    bpm: state.bpm,
    seed: state.seed,
    chaining: state.chaining,
    input,
    steps: state.timeline,
  };
}

export function parsePieceFile(text: string): PieceFile {
  const data = JSON.parse(text);
  if (data?.format !== 'motifrep-piece' || data?.version !== 1) {
    throw new Error('not a motifrep piece file');
  }
  return data as PieceFile;
}

/** Accepts either a bare motif JSON ({valid_len, rows}) or a piece file. */
export function parseImport(text: string): { motif: WireMotif; piece: PieceFile | null } {
  const data = JSON.parse(text);
  if (data?.format === 'motifrep-piece') {
    const piece = parsePieceFile(text);
    return { motif: piece.input, piece };
  }
  if (typeof data?.valid_len === 'number' && Array.isArray(data?.rows)) {
    return { motif: data as WireMotif, piece: null };
  }
  throw new Error('unrecognized file: expected a motif or piece JSON');
}

export function timelineMotifs(state: SessionState, inputNotes: WireMotif | null): WireMotif[] {
  const motifs: WireMotif[] = [];
  if (inputNotes) motifs.push(inputNotes);
  for (const step of state.timeline) motifs.push(step.motif);
  return motifs;
}

export function currentInputWire(state: SessionState): WireMotif {
  return toWireMotif(state.notes, state.bpm);
}

export function downloadBlob(bytes: Uint8Array | string, name: string, mime: string): void {
  const part = typeof bytes === 'string' ? bytes : new Uint8Array(bytes).buffer;
  const blob = new Blob([part], { type: mime });
  const url = URL.createObjectURL(blob);
  const link = document.createElement('a');
  link.href = url;
  link.download = name;
  link.click();
  setTimeout(() => URL.revokeObjectURL(url), 1000);
}
