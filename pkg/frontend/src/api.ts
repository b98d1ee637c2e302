import type { CatalogEntry, Snapshot, TrainResult } from "./types.js";

/** Error carrying the server's own message, for the toast. */
export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

export type FetchLike = typeof fetch;

/**
 * Thin client over the gateway HTTP API. Every method issues exactly one
 * request; mutation responses return the snapshot the server applied.
 */
export class ApiClient {
  private base: string;
  private fetchImpl: FetchLike;

  constructor(base = "", fetchImpl: FetchLike = fetch) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  url(path: string): string {
    return this.base + path;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.url(path), init);
    if (!resp.ok) {
      let message = `HTTP ${resp.status}`;
      try {
        const body = (await resp.json()) as { error?: string };
        if (body.error) message = body.error;
      } catch {
        // non-JSON error body, keep the status line
      }
      throw new ApiError(resp.status, message);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body?: Record<string, unknown>): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
  }

  getState(): Promise<Snapshot> {
    return this.request<Snapshot>("/state");
  }

  getCatalog(): Promise<CatalogEntry[]> {
    return this.request<CatalogEntry[]>("/catalog");
  }

  async fetchFrame(): Promise<ArrayBuffer> {
    const resp = await this.fetchImpl(this.url("/frame"));
    if (!resp.ok) throw new ApiError(resp.status, `HTTP ${resp.status}`);
    return resp.arrayBuffer();
  }

  pressSwitch(index: number): Promise<Snapshot> {
    return this.post<Snapshot>(`/switch/${index}/press`);
  }

  setMode(mode: string): Promise<Snapshot> {
    return this.post<Snapshot>("/mode", { mode });
  }

  setScene(scene: string, run?: number): Promise<Snapshot> {
    const body: Record<string, unknown> = { scene };
    if (run !== undefined) body.run = run;
    return this.post<Snapshot>("/scene", body);
  }

  setClock(opts: { paused?: boolean; rate?: number }): Promise<Snapshot> {
    return this.post<Snapshot>("/clock", opts);
  }

  train(overrides?: Record<string, unknown>): Promise<TrainResult> {
    return this.post<TrainResult>("/train", overrides);
  }
}
