import { describe, expect, it } from "vitest";
import {
  INITIAL_BACKOFF_MS,
  MAX_BACKOFF_MS,
  SseParser,
  connectEvents,
} from "../src/sse.js";
import type { GatewayEvent } from "../src/types.js";

describe("SseParser", () => {
  it("parses complete events", () => {
    const parser = new SseParser();
    expect(parser.feed('data: {"a":1}\n\ndata: {"b":2}\n\n')).toEqual([
      '{"a":1}',
      '{"b":2}',
    ]);
  });

  it("holds partial frames across chunks", () => {
    const parser = new SseParser();
    expect(parser.feed('data: {"a"')).toEqual([]);
    expect(parser.feed(':1}\n')).toEqual([]);
    expect(parser.feed("\n")).toEqual(['{"a":1}']);
  });

  it("ignores keepalive comments", () => {
    const parser = new SseParser();
    expect(parser.feed(": ping\n\ndata: x\n\n")).toEqual(["x"]);
  });

  it("joins multi-line data fields", () => {
    const parser = new SseParser();
    expect(parser.feed("data: a\ndata: b\n\n")).toEqual(["a\nb"]);
  });
});

function sseBody(...events: unknown[]): ReadableStream<Uint8Array> {
  const encoder = new TextEncoder();
  return new ReadableStream<Uint8Array>({
    start(controller) {
      for (const event of events) {
        controller.enqueue(encoder.encode(`data: ${JSON.stringify(event)}\n\n`));
      }
      controller.close();
    },
  });
}

describe("connectEvents", () => {
  it("delivers events and reports status", async () => {
    const seen: GatewayEvent[] = [];
    const statuses: boolean[] = [];
    const timers: { fn: () => void; ms: number }[] = [];
    let calls = 0;
    const fetchImpl = (async () => {
      calls++;
      if (calls > 1) throw new Error("down");
      return new Response(sseBody({ timestamp: 1, kind: "hello", payload: {} }), {
        status: 200,
      });
    }) as typeof fetch;

    connectEvents(
      "http://x/events",
      {
        onEvent: (event) => seen.push(event),
        onStatus: (connected) => statuses.push(connected),
      },
      { fetchImpl, setTimeoutImpl: (fn, ms) => timers.push({ fn, ms }) },
    );
    await new Promise((r) => setTimeout(r, 20));

    expect(seen).toHaveLength(1);
    expect(seen[0]!.kind).toBe("hello");
    expect(statuses[0]).toBe(true);
    // stream closed by the server: a reconnect is pending at the initial delay
    expect(timers).toHaveLength(1);
    expect(timers[0]!.ms).toBe(INITIAL_BACKOFF_MS);
  });

  it("doubles the retry delay up to the cap and resets on success", async () => {
    const delays: number[] = [];
    const timers: (() => void)[] = [];
    let fail = true;
    const fetchImpl = (async () => {
      if (fail) throw new Error("down");
      return new Response(sseBody({ timestamp: 1, kind: "hello", payload: {} }), {
        status: 200,
      });
    }) as typeof fetch;

    connectEvents(
      "http://x/events",
      {
        onEvent: () => {},
        onStatus: (_connected, retryMs) => {
          if (retryMs !== undefined) delays.push(retryMs);
        },
      },
      {
        fetchImpl,
        setTimeoutImpl: (fn) => {
          timers.push(fn as () => void);
        },
      },
    );

    const settle = () => new Promise((r) => setTimeout(r, 5));
    await settle();
    for (let i = 0; i < 8; i++) {
      timers.pop()!();
      await settle();
    }
    expect(delays.slice(0, 9)).toEqual([500, 1000, 2000, 4000, 8000, 10000, 10000, 10000, 10000]);
    expect(Math.max(...delays)).toBe(MAX_BACKOFF_MS);

    // one good connection resets the ladder; its close retries at the floor
    fail = false;
    timers.pop()!();
    await settle();
    expect(delays[9]).toBe(INITIAL_BACKOFF_MS);
    fail = true;
    timers.pop()!();
    await settle();
    expect(delays[10]).toBe(2 * INITIAL_BACKOFF_MS);
  });

  it("stops cleanly", async () => {
    let calls = 0;
    const fetchImpl = (async () => {
      calls++;
      throw new Error("down");
    }) as typeof fetch;
    const timers: (() => void)[] = [];
    const stop = connectEvents(
      "http://x/events",
      { onEvent: () => {}, onStatus: () => {} },
      { fetchImpl, setTimeoutImpl: (fn) => timers.push(fn as () => void) },
    );
    await new Promise((r) => setTimeout(r, 5));
    stop();
    for (const fn of timers.splice(0)) fn();
    await new Promise((r) => setTimeout(r, 5));
    expect(calls).toBe(1); // no attempts after stop
  });
});
