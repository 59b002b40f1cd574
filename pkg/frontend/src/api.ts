/** Thin typed client for the motifrep HTTP service. */

import {
  ClassifyResponse,
  GenerateResponse,
  ModelInfo,
  RepetitionType,
  WireMotif,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    message: string
  ) {
    super(message);
  }
}

async function readError(resp: Response): Promise<never> {
  let message = `${resp.status}`;
  try {
    const body = await resp.json();
    message =
      typeof body.detail === 'string'
        ? body.detail
        : JSON.stringify(body.detail ?? body);
  } catch {
    /* body was not JSON; keep the status text */
  }
  throw new ServiceError(resp.status, message);
}

export class ServiceClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args)
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) await readError(resp);
    return (await resp.json()) as T;
  }

  classify(motifA: WireMotif, motifB: WireMotif): Promise<ClassifyResponse> {
    return this.post('/v1/classify', { motif_a: motifA, motif_b: motifB });
  }

  check(motif: WireMotif, candidate: WireMotif): Promise<ClassifyResponse> {
    return this.post('/v1/check', { motif, candidate });
  }

  /** One generation step: a single label applied to one motif. */
  generateStep(
    motif: WireMotif,
    label: RepetitionType,
    t: number | null,
    seed: number
  ): Promise<GenerateResponse> {
    return this.post('/v1/generate', {
      motif,
      labels: [label],
      t: [t],
      seed,
      chaining: true,
    });
  }

  /** Regenerate a whole timeline in one call (used for export). */
  generateAll(
    motif: WireMotif,
    labels: RepetitionType[],
    t: Array<number | null>,
    seed: number,
    chaining: boolean
  ): Promise<GenerateResponse> {
    return this.post('/v1/generate', { motif, labels, t, seed, chaining });
  }

  async modelInfo(): Promise<ModelInfo> {
    const resp = await this.fetchFn(`${this.base}/v1/model`);
    if (!resp.ok) await readError(resp);
    return (await resp.json()) as ModelInfo;
  }
}

export function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  return bytes;
}
