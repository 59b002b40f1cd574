import { describe, expect, it } from 'vitest';

import { fatePreset, toWireMotif } from '../src/grid.js';
import {
  HistoryState,
  TimelineStep,
  chainingInvariantHolds,
  dispatch,
  initialHistory,
  undo,
} from '../src/state.js';
import { StepVerdict, WireMotif } from '../src/types.js';

function step(motif: WireMotif, requested = 'StR' as const): TimelineStep {
  const verdict: StepVerdict = { requested, label: requested, detail: null };
  return { motif, verdict, t: null };
}

function withFate(h: HistoryState): HistoryState {
  return dispatch(h, { kind: 'load-preset' });
}

describe('editing and undo', () => {
  it('undo restores the exact previous state object', () => {
    let h = initialHistory();
    const before = h.present;
    h = withFate(h);
    expect(h.present.notes).toHaveLength(4);
    h = undo(h);
    expect(h.present).toBe(before); // same reference, not a reconstruction
  });

  it('undo across several actions walks back one at a time', () => {
    let h = initialHistory();
    h = withFate(h);
    h = dispatch(h, { kind: 'add-note', note: { pitch: 70, slot: 8, duration: 2, velocity: 82 } });
    h = dispatch(h, { kind: 'set-seed', seed: 42 });
    expect(h.present.seed).toBe(42);
    h = undo(h);
    expect(h.present.seed).toBe(0);
    expect(h.present.notes).toHaveLength(5);
    h = undo(h);
    expect(h.present.notes).toHaveLength(4);
  });

  it('no-op actions do not grow history', () => {
    let h = initialHistory();
    const before = h;
    h = dispatch(h, { kind: 'begin-generate' }); // empty grid: refused
    expect(h).toBe(before);
  });
});

describe('generation lifecycle', () => {
  it('one request in flight at a time', () => {
    let h = withFate(initialHistory());
    h = dispatch(h, { kind: 'begin-generate' });
    const token = h.present.inFlight;
    expect(token).not.toBeNull();
    const again = dispatch(h, { kind: 'begin-generate' });
    expect(again.present.inFlight).toBe(token);
  });

  it('stale responses are discarded after an edit', () => {
    let h = withFate(initialHistory());
    h = dispatch(h, { kind: 'begin-generate' });
    const token = h.present.inFlight!;
    h = dispatch(h, { kind: 'add-note', note: { pitch: 48, slot: 12, duration: 1, velocity: 82 } });
    expect(h.present.inFlight).toBeNull();
    const motif = toWireMotif(fatePreset(), 108);
    const after = dispatch(h, { kind: 'generate-ok', token, step: step(motif) });
    expect(after.present.timeline).toHaveLength(0);
  });

  it('successful chained step appends and feeds the editor', () => {
    let h = withFate(initialHistory());
    h = dispatch(h, { kind: 'begin-generate' });
    const token = h.present.inFlight!;
    const motif = toWireMotif(
      [{ pitch: 65, slot: 0, duration: 2, velocity: 82 }],
      108
    );
    h = dispatch(h, { kind: 'generate-ok', token, step: step(motif) });
    expect(h.present.timeline).toHaveLength(1);
    expect(h.present.notes).toEqual([{ pitch: 65, slot: 0, duration: 2, velocity: 82 }]);
    expect(h.present.inFlight).toBeNull();
    expect(chainingInvariantHolds(h.present)).toBe(true);
  });

  it('unchained step leaves the editor alone', () => {
    let h = withFate(initialHistory());
    h = dispatch(h, { kind: 'set-chaining', chaining: false });
    h = dispatch(h, { kind: 'begin-generate' });
    const token = h.present.inFlight!;
    const motif = toWireMotif([{ pitch: 65, slot: 0, duration: 2, velocity: 82 }], 108);
    h = dispatch(h, { kind: 'generate-ok', token, step: step(motif) });
    expect(h.present.notes).toHaveLength(4); // still the fate motif
  });

  it('failure records the message and clears the flight', () => {
    let h = withFate(initialHistory());
    h = dispatch(h, { kind: 'begin-generate' });
    const token = h.present.inFlight!;
    h = dispatch(h, { kind: 'generate-failed', token, message: 'boom' });
    expect(h.present.lastError).toBe('boom');
    expect(h.present.inFlight).toBeNull();
  });
});

describe('timeline upkeep', () => {
  it('remove-step drops exactly one entry', () => {
    let h = withFate(initialHistory());
    const motif = toWireMotif(fatePreset(), 108);
    for (let i = 0; i < 3; i++) {
      h = dispatch(h, { kind: 'begin-generate' });
      h = dispatch(h, { kind: 'generate-ok', token: h.present.inFlight!, step: step(motif) });
    }
    expect(h.present.timeline).toHaveLength(3);
    h = dispatch(h, { kind: 'remove-step', index: 1 });
    expect(h.present.timeline).toHaveLength(2);
  });
});
