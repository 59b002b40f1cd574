/** Composition workbench: draw a one-bar motif, grow a piece one
 * repetition-type choice at a time, audition it, export it.
 *
 * All labels shown anywhere come from service classification responses;
 * the client never decides music theory on its own.
 */

import { ServiceClient, ServiceError, base64ToBytes } from './api.js';
import {
  currentInputWire,
  downloadBlob,
  exportPiece,
  parseImport,
  timelineMotifs,
} from './files.js';
import { noteAt } from './grid.js';
import { PlaybackHandle, play } from './playback.js';
import {
  HistoryState,
  TimelineStep,
  chainingInvariantHolds,
  dispatch,
  initialHistory,
  undo,
} from './state.js';
import { ALL_TYPES, RepetitionType, WireMotif } from './types.js';

const PITCH_TOP = 96; // C7
const PITCH_BOTTOM = 36; // C2
const SLOTS = 16;

const endpoint =
  new URLSearchParams(location.search).get('service') ?? 'http://127.0.0.1:8571';
const client = new ServiceClient(endpoint);

let history: HistoryState = initialHistory(endpoint);
let originInput: WireMotif | null = null; // input of the first timeline step
let drawDuration = 1;
let transposeAmount = -2;
let playing: PlaybackHandle | null = null;

function state() {
  return history.present;
}

function act(action: Parameters<typeof dispatch>[1]) {
  history = dispatch(history, action);
  render();
}

// --- generation -------------------------------------------------------------

async function generateStep(label: RepetitionType) {
  const s = state();
  if (s.inFlight !== null || s.notes.length === 0) return;
  const input = currentInputWire(s);
  if (s.timeline.length === 0) originInput = input;
  const t = label === 'TrR' ? transposeAmount : null;

  act({ kind: 'begin-generate' });
  const token = state().inFlight;
  if (token === null) return;
  try {
    const resp = await client.generateStep(input, label, t, s.seed);
    const raw = resp.piece.motifs[1];
    // strip the label annotation; the check endpoint wants a bare motif
    const output: WireMotif = { valid_len: raw.valid_len, rows: raw.rows };
    const verdict = await client.check(input, output);
    const step: TimelineStep = {
      motif: output,
      verdict: { requested: label, ...verdict },
      t,
    };
    act({ kind: 'generate-ok', token, step });
  } catch (err) {
    const message =
      err instanceof ServiceError ? `service: ${err.message}` : String(err);
    act({ kind: 'generate-failed', token, message });
  }
}

async function exportMidi() {
  const s = state();
  if (s.timeline.length === 0 || originInput === null) return;
  try {
    const resp = await client.generateAll(
      originInput,
      s.timeline.map((st) => st.verdict.requested),
      s.timeline.map((st) => st.t),
      s.seed,
      s.chaining
    );
    const regenerated = resp.piece.motifs.slice(1);
    const matches =
      regenerated.length === s.timeline.length &&
      regenerated.every(
        (m, i) => JSON.stringify(m.rows) === JSON.stringify(s.timeline[i].motif.rows)
      );
    if (!matches) {
      setStatus('note: timeline was edited mid-chain; exported the regenerated piece');
    }
    downloadBlob(base64ToBytes(resp.midi_base64), 'piece.mid', 'audio/midi');
  } catch (err) {
    setStatus(err instanceof ServiceError ? `service: ${err.message}` : String(err));
  }
}

function exportJson() {
  const s = state();
  if (originInput === null) return;
  const piece = exportPiece(s, originInput);
  downloadBlob(JSON.stringify(piece, null, 2), 'piece.json', 'application/json');
}

function importFile(text: string) {
  try {
    const { motif, piece } = parseImport(text);
    act({ kind: 'import-motif', motif });
    if (piece) {
      originInput = piece.input;
      act({ kind: 'set-seed', seed: piece.seed });
      act({ kind: 'set-chaining', chaining: piece.chaining });
      for (const step of piece.steps) {
        history = {
          present: { ...state(), timeline: [...state().timeline, step] },
          past: [...history.past, state()],
        };
      }
      act({ kind: 'import-motif', motif: piece.steps.length
        ? piece.steps[piece.steps.length - 1].motif
        : piece.input });
    }
    render();
  } catch (err) {
    setStatus(String(err));
  }
}

// --- rendering ---------------------------------------------------------------

const root = document.getElementById('app')!;
let statusLine: HTMLElement;

function setStatus(text: string) {
  if (statusLine) statusLine.textContent = text;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function button(label: string, cls: string, onClick: () => void): HTMLButtonElement {
  const b = el('button', cls, label);
  b.addEventListener('click', onClick);
  return b;
}

function isBlackKey(pitch: number): boolean {
  return [1, 3, 6, 8, 10].includes(pitch % 12);
}

function pitchName(pitch: number): string {
  const names = ['C', 'C#', 'D', 'D#', 'E', 'F', 'F#', 'G', 'G#', 'A', 'A#', 'B'];
  return `${names[pitch % 12]}${Math.floor(pitch / 12) - 1}`;
}

function renderToolbar(): HTMLElement {
  const s = state();
  const bar = el('div', 'toolbar');
  bar.append(
    button('fate motif', 'preset', () => act({ kind: 'load-preset' })),
    button('clear', '', () => act({ kind: 'clear-grid' })),
    button('undo', '', () => {
      history = undo(history);
      render();
    })
  );

  const bpm = el('label', 'field', 'bpm ');
  const bpmInput = el('input') as HTMLInputElement;
  bpmInput.type = 'number';
  bpmInput.value = String(s.bpm);
  bpmInput.addEventListener('change', () => act({ kind: 'set-bpm', bpm: Number(bpmInput.value) }));
  bpm.append(bpmInput);

  const seed = el('label', 'field', 'seed ');
  const seedInput = el('input') as HTMLInputElement;
  seedInput.type = 'number';
  seedInput.value = String(s.seed);
  seedInput.addEventListener('change', () => act({ kind: 'set-seed', seed: Number(seedInput.value) }));
  seed.append(seedInput);

  const chain = el('label', 'field', 'chain ');
  const chainBox = el('input') as HTMLInputElement;
  chainBox.type = 'checkbox';
  chainBox.checked = s.chaining;
  chainBox.addEventListener('change', () => act({ kind: 'set-chaining', chaining: chainBox.checked }));
  chain.append(chainBox);

  const dur = el('label', 'field', 'note length ');
  const durSel = el('select') as HTMLSelectElement;
  for (const d of [1, 2, 4, 8]) {
    const opt = el('option', '', `${d}/16`) as HTMLOptionElement;
    opt.value = String(d);
    durSel.append(opt);
  }
  durSel.value = String(drawDuration);
  durSel.addEventListener('change', () => {
    drawDuration = Number(durSel.value);
  });
  dur.append(durSel);

  bar.append(bpm, seed, chain, dur);
  return bar;
}

function renderGrid(): HTMLElement {
  const s = state();
  const grid = el('div', 'grid');
  grid.style.gridTemplateColumns = `48px repeat(${SLOTS}, 1fr)`;
  for (let pitch = PITCH_TOP; pitch >= PITCH_BOTTOM; pitch--) {
    const label = el('div', 'pitch-label', pitch % 12 === 0 ? pitchName(pitch) : '');
    grid.append(label);
    for (let slot = 0; slot < SLOTS; slot++) {
      const covering = noteAt(s.notes, pitch, slot);
      const cell = el('div', 'cell');
      if (isBlackKey(pitch)) cell.classList.add('black');
      if (slot % 4 === 0) cell.classList.add('beat');
      if (covering) {
        cell.classList.add(covering.slot === slot ? 'note-onset' : 'note-tail');
      }
      cell.addEventListener('click', () => {
        if (covering) {
          act({ kind: 'remove-note', pitch, slot });
        } else {
          act({
            kind: 'add-note',
            note: { pitch, slot, duration: drawDuration, velocity: 82 },
          });
        }
      });
      grid.append(cell);
    }
  }
  return grid;
}

function renderPalette(): HTMLElement {
  const s = state();
  const pal = el('div', 'palette');
  const busy = s.inFlight !== null;
  for (const label of ALL_TYPES) {
    const b = button(label, `type type-${label}`, () => void generateStep(label));
    b.disabled = busy || s.notes.length === 0;
    b.title = {
      StR: 'strict: identical pitches (rule-exact)',
      TrR: 'transpositional: constant shift (rule-exact)',
      SuR: 'subsequential: shared melody subsequence (model)',
      HoR: 'homodirectional: same contour (model)',
      SyR: 'symmetric: mirrored contour (model)',
    }[label];
    pal.append(b);
    if (label === 'TrR') {
      const t = el('input', 'transpose') as HTMLInputElement;
      t.type = 'number';
      t.value = String(transposeAmount);
      t.min = '-24';
      t.max = '24';
      t.title = 'TrR semitones';
      t.addEventListener('change', () => {
        const v = Number(t.value);
        transposeAmount = v === 0 ? -2 : Math.max(-24, Math.min(24, v));
        t.value = String(transposeAmount);
      });
      pal.append(t);
    }
  }
  return pal;
}

function renderTimeline(): HTMLElement {
  const s = state();
  const box = el('div', 'timeline');
  box.append(el('h3', '', `timeline (${s.timeline.length} steps)`));
  const list = el('ol', 'steps');
  s.timeline.forEach((step, i) => {
    const item = el('li', 'step');
    const verified = step.verdict.label === step.verdict.requested;
    const badge = el('span', verified ? 'badge ok' : 'badge warn');
    badge.textContent = verified
      ? `${step.verdict.requested} verified`
      : `${step.verdict.requested} -> ${step.verdict.label}`;
    const detail = step.verdict.detail;
    const detailText =
      detail == null
        ? ''
        : typeof detail === 'string'
          ? ` (${detail})`
          : ` (${detail.kind} ${detail.t > 0 ? '+' : ''}${detail.t})`;
    item.append(
      el('span', 'step-name', `bar ${i + 2}: `),
      badge,
      el('span', 'detail', detailText),
      button('x', 'remove', () => act({ kind: 'remove-step', index: i }))
    );
    list.append(item);
  });
  box.append(list);
  if (!chainingInvariantHolds(s)) {
    box.append(el('div', 'hint', 'editor diverged from the last step (chain will restart here)'));
  }
  return box;
}

function renderTransport(): HTMLElement {
  const s = state();
  const bar = el('div', 'transport');
  const playBtn = button('play', '', () => {
    playing?.stop();
    const motifs = timelineMotifs(s, originInput ?? currentInputWire(s));
    const ctx = new AudioContext();
    playing = play(ctx, motifs, s.bpm);
  });
  const stopBtn = button('stop', '', () => playing?.stop());
  const midiBtn = button('export MIDI', '', () => void exportMidi());
  const jsonBtn = button('export JSON', '', exportJson);
  midiBtn.disabled = jsonBtn.disabled = s.timeline.length === 0;

  const importLabel = el('label', 'import', 'import ');
  const file = el('input') as HTMLInputElement;
  file.type = 'file';
  file.accept = '.json,application/json';
  file.addEventListener('change', async () => {
    const picked = file.files?.[0];
    if (picked) importFile(await picked.text());
    file.value = '';
  });
  importLabel.append(file);

  bar.append(playBtn, stopBtn, midiBtn, jsonBtn, importLabel);
  return bar;
}

function render() {
  const s = state();
  root.replaceChildren();
  root.append(renderToolbar(), renderGrid(), renderPalette(), renderTimeline(), renderTransport());
  statusLine = el('div', 'status');
  statusLine.textContent = s.inFlight !== null ? 'generating...' : (s.lastError ?? '');
  root.append(statusLine);
}

void client
  .modelInfo()
  .then((info) => setStatus(`model: variant ${info.variant}, step ${info.step}`))
  .catch(() => setStatus('service unreachable; rule-based StR/TrR may still work'));

render();
