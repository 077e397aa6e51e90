/** Typed client for the explorer service.
 *
 * Every displayed number comes from these responses untouched (the UI never
 * recounts membership).  Identical concurrent requests are de-duplicated:
 * callers share one in-flight promise per endpoint + body.
 */

import {
  EnsembleRequest,
  EnsembleStatus,
  EmbedPoint,
  LabelRecord,
  Meta,
  QueryResponse,
  Region,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const key = `${method} ${path} ${body === undefined ? "" : JSON.stringify(body)}`;
    const pending = this.inflight.get(key);
    if (pending) {
      return pending as Promise<T>;
    }
    const promise = (async () => {
      const init: RequestInit = { method };
      if (body !== undefined) {
        init.headers = { "content-type": "application/json" };
        init.body = JSON.stringify(body);
      }
      const response = await this.fetchFn(this.baseUrl + path, init);
      if (!response.ok) {
        let detail = `${response.status}`;
        try {
          const payload = await response.json();
          detail = payload.detail ?? payload.error ?? detail;
        } catch {
          /* non-JSON error body */
        }
        throw new ApiError(String(detail), response.status);
      }
      return (await response.json()) as T;
    })();
    this.inflight.set(key, promise);
    try {
      return await promise;
    } finally {
      this.inflight.delete(key);
    }
  }

  embedding(): Promise<EmbedPoint[]> {
    return this.request<EmbedPoint[]>("GET", "/api/embedding");
  }

  meta(): Promise<Meta> {
    return this.request<Meta>("GET", "/api/meta");
  }

  query(region: Region): Promise<QueryResponse> {
    return this.request<QueryResponse>("POST", "/api/query", region);
  }

  labels(): Promise<{ labels: LabelRecord[] }> {
    return this.request<{ labels: LabelRecord[] }>("GET", "/api/labels");
  }

  createLabel(region: Region, text: string, author = ""): Promise<LabelRecord> {
    return this.request<LabelRecord>("POST", "/api/labels", { region, text, author });
  }

  deleteLabel(id: number): Promise<{ deleted: number }> {
    return this.request<{ deleted: number }>("DELETE", `/api/labels/${id}`);
  }

  startEnsemble(region: Region, params: EnsembleRequest = {}): Promise<{ job: string }> {
    return this.request<{ job: string }>("POST", "/api/ensemble", { ...region, ...params });
  }

  ensembleStatus(job: string): Promise<EnsembleStatus> {
    return this.request<EnsembleStatus>("GET", `/api/ensemble/${job}`);
  }

  frameUrl(job: string, t: number): string {
    return `${this.baseUrl}/api/ensemble/${job}/frame/${t}`;
  }
}
