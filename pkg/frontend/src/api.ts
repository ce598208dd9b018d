/** Thin fetch client for the decision service. */

import type {
  DiscreteRequest,
  DiscreteResponse,
  PosteriorSummary,
  WhatIfRequest,
  WhatIfResponse,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(typeof detail === 'string' ? detail : JSON.stringify(detail));
    this.name = 'ServiceError';
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const detail =
        body && typeof body === 'object' && 'detail' in body
          ? (body as { detail: unknown }).detail
          : response.statusText;
      throw new ServiceError(response.status, detail);
    }
    return body as T;
  }

  health(): Promise<{ status: string; artifact_version: string }> {
    return this.request('/health');
  }

  posteriors(): Promise<PosteriorSummary[]> {
    return this.request('/posteriors');
  }

  whatIf(request: WhatIfRequest): Promise<WhatIfResponse> {
    return this.request('/whatif', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    });
  }

  whatIfDiscrete(request: DiscreteRequest): Promise<DiscreteResponse> {
    return this.request('/whatif/discrete', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    });
  }
}
