import { describe, expect, it } from 'vitest';

import { ApiError, ServiceClient } from '../src/api.js';

function fakeFetch(handler: (url: string, init?: RequestInit) => {
  status: number; body: unknown;
}) {
  const calls: { url: string; body: unknown }[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    const parsed = init?.body ? JSON.parse(init.body as string) : undefined;
    calls.push({ url, body: parsed });
    const { status, body } = handler(url, init);
    return {
      ok: status < 400,
      status,
      statusText: String(status),
      json: async () => body,
    } as Response;
  };
  return { impl, calls };
}

describe('ServiceClient', () => {
  it('posts previews to /v1/preview', async () => {
    const { impl, calls } = fakeFetch(() => ({
      status: 200,
      body: { scene_id: 's', base_size: 512, cars: [] },
    }));
    const client = new ServiceClient('http://svc', impl);
    const preview = await client.preview({ schema: 'scene/v1' });
    expect(calls[0].url).toBe('http://svc/v1/preview');
    expect(preview.base_size).toBe(512);
  });

  it('wraps evaluation scenes and forwards detector selection', async () => {
    const { impl, calls } = fakeFetch(() => ({
      status: 200, body: { detectors: {} },
    }));
    const client = new ServiceClient('http://svc', impl);
    await client.evaluate({ schema: 'scene/v1' }, 3, ['mock-a']);
    expect(calls[0].url).toBe('http://svc/v1/evaluate');
    expect(calls[0].body).toEqual({
      scene: { schema: 'scene/v1' }, seed: 3, detectors: ['mock-a'],
    });
  });

  it('raises ApiError with the service error code', async () => {
    const { impl } = fakeFetch(() => ({
      status: 422, body: { code: 'schema', message: 'bad document' },
    }));
    const client = new ServiceClient('http://svc', impl);
    await expect(client.preview({})).rejects.toMatchObject({
      status: 422, code: 'schema',
    });
    await expect(client.preview({})).rejects.toBeInstanceOf(ApiError);
  });

  it('coalesces previews: a superseded response is dropped', async () => {
    let release: (() => void) | null = null;
    const gate = new Promise<void>((resolve) => { release = resolve; });
    let first = true;
    const impl = async (url: string): Promise<Response> => {
      void url;
      const slow = first;
      first = false;
      if (slow) await gate;
      return {
        ok: true, status: 200, statusText: 'OK',
        json: async () => ({ scene_id: slow ? 'old' : 'new',
                             base_size: 512, cars: [] }),
      } as Response;
    };
    const client = new ServiceClient('http://svc', impl);
    const stale = client.preview({ rev: 1 });
    const fresh = client.preview({ rev: 2 });
    release!();
    await expect(fresh).resolves.toMatchObject({ scene_id: 'new' });
    await expect(stale).rejects.toMatchObject({ code: 'superseded' });
  });
});
