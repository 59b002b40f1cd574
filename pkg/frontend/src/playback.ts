/** Client-side synthesis of the timeline: one bar per motif, simple
 * sine-with-envelope voices. Scheduling math is pure so it can be tested;
 * only play() touches the AudioContext. */

import { fromWireMotif } from './grid.js';
import { WireMotif } from './types.js';

export interface ScheduledNote {
  timeSec: number;
  durationSec: number;
  frequencyHz: number;
  gain: number;
}

export function midiToFrequency(pitch: number): number {
  return 440 * Math.pow(2, (pitch - 69) / 12);
}

/** Lay motifs out bar after bar; 16 slots per bar at the given tempo. */
export function computeSchedule(motifs: WireMotif[], bpm: number): ScheduledNote[] {
  const slotSec = 60 / bpm / 4;
  const out: ScheduledNote[] = [];
  motifs.forEach((wire, bar) => {
    for (const n of fromWireMotif(wire)) {
      out.push({
        timeSec: (bar * 16 + n.slot) * slotSec,
        durationSec: n.duration * slotSec,
        frequencyHz: midiToFrequency(n.pitch),
        gain: 0.12 + 0.5 * (n.velocity / 127),
      });
    }
  });
  return out.sort((a, b) => a.timeSec - b.timeSec || a.frequencyHz - b.frequencyHz);
}

export function totalDurationSec(motifs: WireMotif[], bpm: number): number {
  return (motifs.length * 16 * 60) / bpm / 4;
}

export interface PlaybackHandle {
  stop(): void;
  readonly durationSec: number;
}

export function play(
  context: AudioContext,
  motifs: WireMotif[],
  bpm: number
): PlaybackHandle {
  const schedule = computeSchedule(motifs, bpm);
  const start = context.currentTime + 0.06;
  const nodes: OscillatorNode[] = [];
  for (const s of schedule) {
    const osc = context.createOscillator();
    const amp = context.createGain();
    osc.type = 'triangle';
    osc.frequency.value = s.frequencyHz;
    const t0 = start + s.timeSec;
    const t1 = t0 + Math.max(0.05, s.durationSec);
    amp.gain.setValueAtTime(0, t0);
    amp.gain.linearRampToValueAtTime(s.gain, t0 + 0.012);
    amp.gain.setTargetAtTime(0, t1 - 0.04, 0.025);
    osc.connect(amp).connect(context.destination);
    osc.start(t0);
    osc.stop(t1 + 0.15);
    nodes.push(osc);
  }
  return {
    durationSec: totalDurationSec(motifs, bpm),
    stop() {
      for (const osc of nodes) {
        try {
          osc.stop();
        } catch {
          /* already stopped */
        }
      }
    },
  };
}
