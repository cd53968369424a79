/** Typed client over the eplab HTTP API; fetch is injectable for tests. */

import {
  ApiFieldError,
  EvalModelResponse,
  MarkersResponse,
  SweepListEntry,
  SweepPointsResponse,
  TraceListEntry,
  TraceWindowResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export type EvalResult =
  | { ok: true; value: EvalModelResponse }
  | { ok: false; error: ApiFieldError };

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const r = await this.fetchFn(this.base + path);
    if (!r.ok) {
      throw new ApiError(r.status, `${path}: ${r.status}`);
    }
    return (await r.json()) as T;
  }

  listSweeps(): Promise<{ schema_version: number; sweeps: SweepListEntry[] }> {
    return this.getJson("/api/v1/sweeps");
  }

  sweepPoints(digest: string, offset = 0, limit = 500): Promise<SweepPointsResponse> {
    return this.getJson(
      `/api/v1/sweeps/${digest}/points?offset=${offset}&limit=${limit}`,
    );
  }

  markers(digest: string): Promise<MarkersResponse> {
    return this.getJson(`/api/v1/sweeps/${digest}/markers`);
  }

  listTraces(): Promise<{ schema_version: number; traces: TraceListEntry[] }> {
    return this.getJson("/api/v1/traces");
  }

  traceWindow(
    digest: string,
    windowUs: number,
    offset = 0,
    limit = 500,
  ): Promise<TraceWindowResponse> {
    return this.getJson(
      `/api/v1/traces/${digest}/window?window_us=${windowUs}&offset=${offset}&limit=${limit}`,
    );
  }

  async evalModel(body: object): Promise<EvalResult> {
    const r = await this.fetchFn(this.base + "/api/v1/model/eval", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await r.json();
    if (r.status === 400 && payload.error) {
      return { ok: false, error: payload.error as ApiFieldError };
    }
    if (!r.ok) {
      throw new ApiError(r.status, `model/eval: ${r.status}`);
    }
    return { ok: true, value: payload as EvalModelResponse };
  }
}
