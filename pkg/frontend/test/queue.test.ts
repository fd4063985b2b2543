import { describe, expect, it } from 'vitest';

import { ServiceClient } from '../src/api.js';
import { QueueView } from '../src/queue.js';
import type { ReviewItem } from '../src/types.js';

function item(id: string, overrides: Partial<ReviewItem> = {}): ReviewItem {
  return {
    item_id: id,
    run_id: 'r1',
    call_id: `call-${id}`,
    field_id: 'GroupNumber',
    live_call_value: 'AD0156',
    verdict: 'FlagForHuman',
    strategy: 'Hybrid',
    score: 0.2,
    evidence: [],
    status: 'Pending',
    corrected_value: null,
    version: 1,
    ...overrides,
  };
}

interface FakeRoute {
  status: number;
  body: unknown;
}

/** fetch stub keyed by `${method} ${path}` with call recording. */
function fakeFetch(routes: Map<string, FakeRoute | FakeRoute[]>) {
  const calls: Array<{ method: string; path: string; body?: unknown }> = [];
  const impl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input), 'http://service.test');
    const method = init?.method ?? 'GET';
    const key = `${method} ${url.pathname}`;
    calls.push({
      method,
      path: url.pathname + url.search,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    const routed = routes.get(key);
    const route = Array.isArray(routed) ? routed.shift() : routed;
    if (!route) {
      return new Response(JSON.stringify({ detail: `no route for ${key}` }), { status: 500 });
    }
    return new Response(JSON.stringify(route.body), { status: route.status });
  }) as typeof fetch;
  return { impl, calls };
}

function makeQueue(routes: Map<string, FakeRoute | FakeRoute[]>) {
  const { impl, calls } = fakeFetch(routes);
  const client = new ServiceClient({ baseUrl: 'http://service.test', fetchImpl: impl });
  return { queue: new QueueView(client), calls };
}

const FIELDS = {
  status: 200,
  body: {
    fields: [
      { field_id: 'GroupNumber', format_pattern: '[A-Z0-9]{6,10}', criticality: 'Critical' },
      { field_id: 'AgentName', format_pattern: '[A-Z][a-z]+ [A-Z]', criticality: 'NonCritical' },
    ],
  },
};

describe('QueueView', () => {
  it('loads items and tracks selection bounds', async () => {
    const routes = new Map<string, FakeRoute>();
    routes.set('GET /items', {
      status: 200,
      body: { items: [item('a'), item('b')], total: 2, page: 1 },
    });
    const { queue } = makeQueue(routes);
    await queue.load();
    expect(queue.items).toHaveLength(2);
    queue.selectNext();
    expect(queue.current()?.item_id).toBe('b');
    queue.selectNext();
    expect(queue.current()?.item_id).toBe('b');
    queue.selectPrevious();
    expect(queue.current()?.item_id).toBe('a');
  });

  it('validates corrections client-side before any request', async () => {
    const routes = new Map<string, FakeRoute>();
    routes.set('GET /fields', FIELDS);
    routes.set('GET /items', {
      status: 200,
      body: { items: [item('a')], total: 1, page: 1 },
    });
    const { queue, calls } = makeQueue(routes);
    await queue.loadFields();
    await queue.load();
    const outcome = await queue.submit('correct', '??');
    expect(outcome.kind).toBe('invalid');
    // only the two GETs; the invalid value never reached the service
    expect(calls.filter((c) => c.method === 'POST')).toHaveLength(0);
    expect(queue.items).toHaveLength(1);
  });

  it('optimistically removes the item and keeps it gone on success', async () => {
    const routes = new Map<string, FakeRoute>();
    routes.set('GET /fields', FIELDS);
    routes.set('GET /items', {
      status: 200,
      body: { items: [item('a'), item('b')], total: 2, page: 1 },
    });
    routes.set('POST /items/a/review', {
      status: 200,
      body: item('a', { status: 'Approved', version: 2 }),
    });
    const { queue } = makeQueue(routes);
    await queue.loadFields();
    await queue.load();
    const outcome = await queue.submit('approve');
    expect(outcome.kind).toBe('ok');
    expect(queue.items.map((i) => i.item_id)).toEqual(['b']);
    expect(queue.total).toBe(1);
  });

  it('rolls back and refreshes on a version conflict', async () => {
    const routes = new Map<string, FakeRoute>();
    routes.set('GET /fields', FIELDS);
    routes.set('GET /items', {
      status: 200,
      body: { items: [item('a'), item('b')], total: 2, page: 1 },
    });
    routes.set('POST /items/a/review', {
      status: 409,
      body: { detail: 'item a is at version 2, not 1' },
    });
    routes.set('GET /items/a', {
      status: 200,
      body: item('a', { version: 2 }),
    });
    const { queue } = makeQueue(routes);
    await queue.loadFields();
    await queue.load();
    const outcome = await queue.submit('approve');
    expect(outcome.kind).toBe('conflict');
    // the refreshed item is back in the list with the newer version
    expect(queue.items.map((i) => i.item_id)).toEqual(['a', 'b']);
    expect(queue.current()?.version).toBe(2);
  });

  it('does not restore a conflicted item that is already terminal', async () => {
    const routes = new Map<string, FakeRoute>();
    routes.set('GET /fields', FIELDS);
    routes.set('GET /items', {
      status: 200,
      body: { items: [item('a')], total: 1, page: 1 },
    });
    routes.set('POST /items/a/review', {
      status: 409,
      body: { detail: 'item a is Approved; review is terminal' },
    });
    routes.set('GET /items/a', {
      status: 200,
      body: item('a', { status: 'Approved', version: 2 }),
    });
    const { queue } = makeQueue(routes);
    await queue.loadFields();
    await queue.load();
    const outcome = await queue.submit('approve');
    expect(outcome.kind).toBe('conflict');
    expect(queue.items).toHaveLength(0);
  });

  it('restores the original item when the service rejects the value', async () => {
    const routes = new Map<string, FakeRoute>();
    routes.set('GET /fields', FIELDS);
    routes.set('GET /items', {
      status: 200,
      body: { items: [item('a')], total: 1, page: 1 },
    });
    routes.set('POST /items/a/review', {
      status: 422,
      body: { detail: 'does not match' },
    });
    const { queue } = makeQueue(routes);
    await queue.loadFields();
    await queue.load();
    const outcome = await queue.submit('correct', 'ABC1234');
    expect(outcome.kind).toBe('invalid');
    expect(queue.items.map((i) => i.item_id)).toEqual(['a']);
  });
});
