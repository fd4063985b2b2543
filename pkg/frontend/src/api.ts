/**
 * Thin fetch client for the review service. The console talks only to
 * these documented endpoints; it never touches the store directly.
 */

import type { FieldInfo, QueueFilters, QueuePage, ReviewItem, RunInfo } from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

/** 409: someone else reviewed the item first. */
export class ConflictError extends ApiError {}

/** 422: the service rejected the payload (e.g. bad correction format). */
export class ValidationError extends ApiError {}

export interface ClientConfig {
  baseUrl: string;
  token?: string;
  fetchImpl?: typeof fetch;
}

async function raise(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (response.status === 409) throw new ConflictError(409, detail);
  if (response.status === 422) throw new ValidationError(422, detail);
  throw new ApiError(response.status, detail);
}

export class ServiceClient {
  private readonly fetchImpl: typeof fetch;

  constructor(private readonly config: ClientConfig) {
    this.fetchImpl = config.fetchImpl ?? fetch;
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.config.token) headers['Authorization'] = `Bearer ${this.config.token}`;
    return headers;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.config.baseUrl}${path}`, {
      headers: this.headers(),
    });
    if (!response.ok) await raise(response);
    return (await response.json()) as T;
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchImpl(`${this.config.baseUrl}/healthz`);
      return response.ok;
    } catch {
      return false;
    }
  }

  async fields(): Promise<FieldInfo[]> {
    const body = await this.get<{ fields: FieldInfo[] }>('/fields');
    return body.fields;
  }

  async run(runId: string): Promise<RunInfo> {
    return this.get<RunInfo>(`/runs/${encodeURIComponent(runId)}`);
  }

  async items(filters: QueueFilters, page = 1, pageSize = 20): Promise<QueuePage> {
    const params = new URLSearchParams();
    if (filters.status) params.set('status', filters.status);
    if (filters.field) params.set('field', filters.field);
    if (filters.run) params.set('run', filters.run);
    params.set('page', String(page));
    params.set('page_size', String(pageSize));
    return this.get<QueuePage>(`/items?${params.toString()}`);
  }

  async item(itemId: string): Promise<ReviewItem> {
    return this.get<ReviewItem>(`/items/${encodeURIComponent(itemId)}`);
  }

  async submitReview(
    itemId: string,
    version: number,
    action: 'approve' | 'correct',
    correctedValue?: string,
  ): Promise<ReviewItem> {
    const response = await this.fetchImpl(
      `${this.config.baseUrl}/items/${encodeURIComponent(itemId)}/review`,
      {
        method: 'POST',
        headers: this.headers(),
        body: JSON.stringify({
          version,
          action,
          corrected_value: correctedValue ?? null,
        }),
      },
    );
    if (!response.ok) await raise(response);
    return (await response.json()) as ReviewItem;
  }

  async exportGold(runId: string): Promise<string> {
    const response = await this.fetchImpl(
      `${this.config.baseUrl}/runs/${encodeURIComponent(runId)}/export`,
      { headers: this.headers() },
    );
    if (!response.ok) await raise(response);
    return response.text();
  }
}
