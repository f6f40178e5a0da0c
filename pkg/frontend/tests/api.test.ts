import { describe, expect, it, vi } from 'vitest';
import { ApiClient, ApiError } from '../src/api.js';

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

describe('ApiClient', () => {
  it('prefixes the base url and parses json', async () => {
    const fetchFn = vi.fn(async () => jsonResponse(200, { projects: ['demo'] }));
    const client = new ApiClient('http://host:1234/', fetchFn);
    const out = await client.listProjects();
    expect(out.projects).toEqual(['demo']);
    expect(fetchFn).toHaveBeenCalledWith('http://host:1234/api/projects', undefined);
  });

  it('raises ApiError carrying status and detail', async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse(409, { detail: 'blank segments remain' }));
    const client = new ApiClient('', fetchFn);
    const err = await client.runConsensus('demo', 'case01').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.detail).toBe('blank segments remain');
    expect(err.message).toBe('blank segments remain');
  });

  it('keeps structured validation details intact', async () => {
    const issues = [{ code: 'unknown_label', frame: 3, message: 'label 9' }];
    const fetchFn = vi.fn(async () => jsonResponse(422, { detail: issues }));
    const client = new ApiClient('', fetchFn);
    const err = await client.getBlanks('demo', 'case01').catch((e) => e);
    expect(err.status).toBe(422);
    expect(err.detail).toEqual(issues);
  });

  it('falls back to status text on non-json error bodies', async () => {
    const fetchFn = vi.fn(async () =>
      new Response('gateway exploded', { status: 502, statusText: 'Bad Gateway' }));
    const client = new ApiClient('', fetchFn);
    const err = await client.listProjects().catch((e) => e);
    expect(err.status).toBe(502);
    expect(err.detail).toBe('Bad Gateway');
  });

  it('posts resolutions as json', async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse(200, { applied: true, pending: [], pending_count: 0, resolved_count: 1 }));
    const client = new ApiClient('', fetchFn);
    const body = {
      start_frame: 2,
      end_frame: 4,
      label: 1,
      inspector_id: 'insp1',
      submission_id: 'abc',
    };
    const out = await client.postResolution('demo', 'case01', body);
    expect(out.applied).toBe(true);
    const [url, init] = fetchFn.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe('/api/projects/demo/cases/case01/resolutions');
    expect(init.method).toBe('POST');
    expect((init.headers as Record<string, string>)['Content-Type']).toBe('application/json');
    expect(JSON.parse(init.body as string)).toEqual(body);
  });

  it('builds the export url for the download link', () => {
    const client = new ApiClient('http://host');
    expect(client.exportUrl('demo', 'case01'))
      .toBe('http://host/api/projects/demo/cases/case01/export');
  });
});
