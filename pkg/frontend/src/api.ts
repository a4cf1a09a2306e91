import type {
  CatalogResponse,
  DescriptiveRow,
  EvaluateRequest,
  EvaluateResponse,
  JobStatus,
  OptimizeRequest,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly field?: string
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, `service unreachable: ${String(err)}`);
  }
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const err = body && typeof body === 'object' ? (body as any).error : null;
    throw new ApiError(
      response.status,
      err?.message ?? `HTTP ${response.status}`,
      err?.field
    );
  }
  return body as T;
}

/** The service surface the page consumes. */
export interface Api {
  getCatalog(): Promise<CatalogResponse>;
  getDescriptives(): Promise<{ rows: DescriptiveRow[] }>;
  evaluate(body: EvaluateRequest): Promise<EvaluateResponse>;
  submitOptimize(body: OptimizeRequest): Promise<{ job_id: string }>;
  getJob(jobId: string): Promise<JobStatus>;
}

/** Thin typed client over the /api endpoints; performs no math of its own. */
export class ApiClient implements Api {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  getCatalog(): Promise<CatalogResponse> {
    return request(this.url('/api/catalog'));
  }

  getDescriptives(): Promise<{ rows: DescriptiveRow[] }> {
    return request(this.url('/api/descriptives'));
  }

  evaluate(body: EvaluateRequest): Promise<EvaluateResponse> {
    return request(this.url('/api/evaluate'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  submitOptimize(body: OptimizeRequest): Promise<{ job_id: string }> {
    return request(this.url('/api/optimize'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  getJob(jobId: string): Promise<JobStatus> {
    return request(this.url(`/api/optimize/${jobId}`));
  }
}
