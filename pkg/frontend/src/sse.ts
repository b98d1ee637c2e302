import type { GatewayEvent } from "./types.js";

// EventSource gives no control over retry pacing, so the stream is consumed
// through fetch + ReadableStream and reconnection is scheduled by hand:
// 0.5 s doubling to a 10 s cap, reset once a connection delivers data.

export const INITIAL_BACKOFF_MS = 500;
export const MAX_BACKOFF_MS = 10000;

/** Incremental parser for a text/event-stream byte feed. */
export class SseParser {
  private buffer = "";

  /** Feed a decoded chunk; returns the data payloads of completed events. */
  feed(chunk: string): string[] {
    this.buffer += chunk;
    const events: string[] = [];
    let sep;
    while ((sep = this.buffer.indexOf("\n\n")) >= 0) {
      const block = this.buffer.slice(0, sep);
      this.buffer = this.buffer.slice(sep + 2);
      const data = block
        .split("\n")
        .filter((line) => line.startsWith("data:"))
        .map((line) => line.slice(5).trimStart())
        .join("\n");
      if (data) events.push(data); // comment-only blocks are keepalives
    }
    return events;
  }
}

export interface StreamHandlers {
  onEvent: (event: GatewayEvent) => void;
  onStatus: (connected: boolean, retryMs?: number) => void;
}

export interface StreamOptions {
  fetchImpl?: typeof fetch;
  setTimeoutImpl?: (fn: () => void, ms: number) => unknown;
}

/** Subscribe to the gateway event stream; returns a stop function. */
export function connectEvents(
  url: string,
  handlers: StreamHandlers,
  options: StreamOptions = {},
): () => void {
  const fetchImpl = options.fetchImpl ?? fetch;
  const schedule = options.setTimeoutImpl ?? ((fn, ms) => setTimeout(fn, ms));
  let backoff = INITIAL_BACKOFF_MS;
  let stopped = false;
  let controller: AbortController | null = null;

  const retry = () => {
    if (stopped) return;
    handlers.onStatus(false, backoff);
    const wait = backoff;
    backoff = Math.min(backoff * 2, MAX_BACKOFF_MS);
    schedule(run, wait);
  };

  const run = async () => {
    if (stopped) return;
    controller = new AbortController();
    const parser = new SseParser();
    const decoder = new TextDecoder();
    try {
      const resp = await fetchImpl(url, { signal: controller.signal });
      if (!resp.ok || !resp.body) throw new Error(`stream HTTP ${resp.status}`);
      const reader = resp.body.getReader();
      while (true) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const data of parser.feed(decoder.decode(value, { stream: true }))) {
          let event: GatewayEvent;
          try {
            event = JSON.parse(data) as GatewayEvent;
          } catch {
            continue; // malformed frame, wait for the next one
          }
          backoff = INITIAL_BACKOFF_MS; // a delivered event proves the link
          handlers.onStatus(true);
          handlers.onEvent(event);
        }
      }
      retry(); // server closed the stream
    } catch {
      retry();
    }
  };

  void run();
  return () => {
    stopped = true;
    if (controller) controller.abort();
  };
}
