import { describe, expect, it } from "vitest";
import { ApiClient, ApiError } from "../src/api.js";

interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

function recordingFetch(status = 200, payload: unknown = { ok: true }) {
  const calls: Recorded[] = [];
  const fetchImpl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    calls.push({
      url: String(input),
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    return new Response(JSON.stringify(payload), { status });
  }) as typeof fetch;
  return { calls, fetchImpl };
}

describe("ApiClient", () => {
  it("issues exactly one request per call, on the right route", async () => {
    const { calls, fetchImpl } = recordingFetch();
    const api = new ApiClient("http://gw", fetchImpl);
    await api.pressSwitch(3);
    await api.setMode("automation");
    await api.setScene("A41", 2);
    await api.setClock({ paused: true });
    await api.train();
    await api.getState();
    expect(calls.map((c) => `${c.method} ${c.url}`)).toEqual([
      "POST http://gw/switch/3/press",
      "POST http://gw/mode",
      "POST http://gw/scene",
      "POST http://gw/clock",
      "POST http://gw/train",
      "GET http://gw/state",
    ]);
    expect(calls[1]!.body).toEqual({ mode: "automation" });
    expect(calls[2]!.body).toEqual({ scene: "A41", run: 2 });
    expect(calls[3]!.body).toEqual({ paused: true });
  });

  it("omits run when not given", async () => {
    const { calls, fetchImpl } = recordingFetch();
    const api = new ApiClient("", fetchImpl);
    await api.setScene("A00");
    expect(calls[0]!.body).toEqual({ scene: "A00" });
  });

  it("surfaces the server's error message", async () => {
    const { fetchImpl } = recordingFetch(400, { error: "switch index must be in 1..4, got 9" });
    const api = new ApiClient("", fetchImpl);
    await expect(api.pressSwitch(9)).rejects.toThrow("switch index must be in 1..4, got 9");
  });

  it("falls back to the status line for non-JSON errors", async () => {
    const fetchImpl = (async () => new Response("boom", { status: 502 })) as typeof fetch;
    const api = new ApiClient("", fetchImpl);
    try {
      await api.getState();
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(502);
      expect((err as ApiError).message).toBe("HTTP 502");
    }
  });
});
