/**
 * Client for the composer service; fetch is injectable for tests.
 * Preview requests may be coalesced: when a newer preview is issued
 * before the previous answer arrives, the stale answer is dropped.
 */

import type { ComposerClient, PreviewGeometry } from './state.js';

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient implements ComposerClient {
  private previewTicket = 0;

  constructor(private baseUrl: string,
              private fetchImpl: FetchLike = globalThis.fetch.bind(globalThis)) {}

  private async post(path: string, body: unknown): Promise<any> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload?.code ?? 'unknown',
                         payload?.message ?? response.statusText);
    }
    return payload;
  }

  async preview(doc: Record<string, unknown>): Promise<PreviewGeometry> {
    const ticket = ++this.previewTicket;
    const result = await this.post('/v1/preview', doc);
    if (ticket !== this.previewTicket) {
      throw new ApiError(0, 'superseded', 'a newer preview is in flight');
    }
    return result as PreviewGeometry;
  }

  async evaluate(doc: Record<string, unknown>, seed: number,
                 detectors?: string[]): Promise<Record<string, any>> {
    const body: Record<string, unknown> = { scene: doc, seed };
    if (detectors !== undefined) body['detectors'] = detectors;
    return this.post('/v1/evaluate', body);
  }

  async saveScene(doc: Record<string, unknown>): Promise<string> {
    const result = await this.post('/v1/scenes', doc);
    return result['scene_id'] as string;
  }

  async health(): Promise<{ ready: boolean; detectors: string[] }> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1/health`);
    return response.json();
  }
}
