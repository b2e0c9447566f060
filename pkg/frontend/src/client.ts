// Thin typed wrapper over the /v1 HTTP API. The fetch implementation is
// injectable so tests can run against an in-memory server.

import type {
  Command,
  CommandResult,
  DebugSeriesResponse,
  LayoutDocument,
  LayoutQuery,
  PatchesResponse,
  SessionSnapshot,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private fetchFn: FetchLike;

  constructor(
    private base: string,
    fetchFn?: FetchLike,
  ) {
    // wrap the global so it is not called with a bad `this`
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = typeof body === "string" ? body : JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let detail = `${method} ${path} failed with ${resp.status}`;
      try {
        const parsed = await resp.json();
        if (parsed && typeof parsed.detail === "string") detail = parsed.detail;
      } catch {
        // non-JSON error body, keep the generic message
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  uploadSnapshot(payload: string | object): Promise<{ id: string }> {
    return this.request("POST", "/v1/snapshots", payload);
  }

  getLayout(snapshotId: string, query?: LayoutQuery): Promise<LayoutDocument> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query ?? {})) {
      if (value !== undefined) params.set(key, String(value));
    }
    const qs = params.size > 0 ? `?${params.toString()}` : "";
    return this.request("GET", `/v1/snapshots/${snapshotId}/layout${qs}`);
  }

  createSession(snapshotId: string): Promise<SessionSnapshot> {
    return this.request("POST", "/v1/sessions", { snapshotId });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request("GET", `/v1/sessions/${sessionId}`);
  }

  sendCommand(sessionId: string, command: Command, expectedVersion: number): Promise<CommandResult> {
    return this.request("POST", `/v1/sessions/${sessionId}/commands`, {
      command,
      expectedVersion,
    });
  }

  undo(sessionId: string): Promise<CommandResult> {
    return this.request("GET", `/v1/sessions/${sessionId}/undo`);
  }

  getDebugSeries(snapshotId: string, kind: string): Promise<DebugSeriesResponse> {
    return this.request("GET", `/v1/snapshots/${snapshotId}/debug/${kind}`);
  }

  getPatches(snapshotId: string, neuronId: string): Promise<PatchesResponse> {
    return this.request("GET", `/v1/snapshots/${snapshotId}/neurons/${neuronId}/patches`);
  }
}
