import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiError, fetchSession, submitPlate } from '../src/api.js';
import { okResponse } from './fixtures.js';

const BASE = 'http://testserver';

afterEach(() => {
  vi.unstubAllGlobals();
});

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json; charset=utf-8' },
  });
}

describe('submitPlate', () => {
  it('posts multipart form and parses the response', async () => {
    const expected = okResponse();
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(expected));
    vi.stubGlobal('fetch', fetchMock);

    const blob = new Blob(['fake-bytes'], { type: 'image/png' });
    const result = await submitPlate(BASE, blob, 'scene.png', 'device-1');

    expect(result).toEqual(expected);
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe(`${BASE}/api/v1/plates`);
    expect(init.method).toBe('POST');
    const form = init.body as FormData;
    expect(form.get('device_id')).toBe('device-1');
    expect(form.get('image')).toBeTruthy();
  });

  it('maps HTTP 400 to ApiError with the server detail', async () => {
    vi.stubGlobal('fetch', vi.fn().mockResolvedValue(
      jsonResponse({ detail: 'undecodable image' }, 400)));
    await expect(submitPlate(BASE, new Blob(['x']), 'x.png', 'd'))
      .rejects.toMatchObject({ httpStatus: 400, message: 'undecodable image' });
  });

  it('propagates network failures', async () => {
    vi.stubGlobal('fetch', vi.fn().mockRejectedValue(new TypeError('connection refused')));
    await expect(submitPlate(BASE, new Blob(['x']), 'x.png', 'd'))
      .rejects.toBeInstanceOf(TypeError);
  });
});

describe('fetchSession', () => {
  it('returns the stored response', async () => {
    const expected = okResponse();
    vi.stubGlobal('fetch', vi.fn().mockResolvedValue(jsonResponse(expected)));
    expect(await fetchSession(BASE, expected.session_id)).toEqual(expected);
  });

  it('maps 404 to ApiError', async () => {
    vi.stubGlobal('fetch', vi.fn().mockResolvedValue(jsonResponse({ detail: 'x' }, 404)));
    try {
      await fetchSession(BASE, 'nope');
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).httpStatus).toBe(404);
    }
  });
});
