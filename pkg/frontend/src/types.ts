/** Wire types shared with the motifrep HTTP service (see docs/api.md). */

export const MAX_ROWS = 120;
export const NUM_ATTRIBUTES = 7;
export const SLOTS_PER_BAR = 16;

/** Attribute column indices in a token row. */
export const COL = {
  tempo: 0,
  chord: 1,
  position: 2,
  type: 3,
  pitch: 4,
  duration: 5,
  velocity: 6,
} as const;

export const TYPE_NOTE = 1;
export const TYPE_METRIC = 2;

export type RepetitionType = 'StR' | 'TrR' | 'SuR' | 'HoR' | 'SyR';
export const ALL_TYPES: RepetitionType[] = ['StR', 'TrR', 'SuR', 'HoR', 'SyR'];

export interface WireMotif {
  valid_len: number;
  rows: number[][];
}

export type LabelDetail =
  | null
  | string
  | { kind: 'chromatic' | 'diatonic'; t: number };

export interface ClassifyResponse {
  label: string;
  detail: LabelDetail;
}

export interface StepVerdict extends ClassifyResponse {
  requested: RepetitionType;
}

export interface GenerateResponse {
  piece: {
    motifs: Array<WireMotif & { label: string | null }>;
    provenance: unknown;
  };
  labels: StepVerdict[];
  midi_base64: string;
}

export interface ModelInfo {
  config: Record<string, unknown>;
  variant: 'V' | 'R' | 'RR';
  step: number;
  checkpoint_hash: string | null;
}

/** One note on the editor grid; durations are sixteenth slots. */
export interface GridNote {
  pitch: number; // MIDI 0-127
  slot: number; // 0-15
  duration: number; // >= 1, slot + duration <= 16
  velocity: number; // 1-127
}
