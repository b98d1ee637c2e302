import { describe, expect, it } from "vitest";
import { FEED_LIMIT, PanelStore, majorityWinner } from "../src/store.js";
import type { GatewayEvent, Snapshot } from "../src/types.js";

function event(kind: string, payload: Record<string, unknown> = {}, t = 0): GatewayEvent {
  return { timestamp: t, kind, payload };
}

describe("PanelStore feed", () => {
  it("keeps stream order without loss for bursts up to the limit", () => {
    const store = new PanelStore();
    for (let i = 0; i < FEED_LIMIT; i++) {
      store.applyEvent(event("control", { seq: i }, i));
    }
    const feed = store.current.feed;
    expect(feed).toHaveLength(FEED_LIMIT);
    feed.forEach((entry, i) => expect(entry.payload.seq).toBe(i));
  });

  it("evicts oldest entries beyond the limit", () => {
    const store = new PanelStore();
    for (let i = 0; i < FEED_LIMIT + 50; i++) {
      store.applyEvent(event("control", { seq: i }, i));
    }
    const feed = store.current.feed;
    expect(feed).toHaveLength(FEED_LIMIT);
    expect(feed[0]!.payload.seq).toBe(50);
    expect(feed[FEED_LIMIT - 1]!.payload.seq).toBe(FEED_LIMIT + 49);
  });

  it("mirrors snapshots from hello and state events only", () => {
    const store = new PanelStore();
    store.applyEvent(event("control", { bits: "0001" }));
    expect(store.current.snapshot).toBeNull();
    store.applyEvent(event("hello", { switches: "0000", mode: "manual" }));
    expect(store.current.snapshot!.mode).toBe("manual");
    store.applyEvent(event("state", { switches: "0100", mode: "manual" }));
    expect(store.current.snapshot!.switches).toBe("0100");
  });

  it("applies mutation response snapshots directly", () => {
    const store = new PanelStore();
    store.applySnapshot({ switches: "0010" } as Snapshot);
    expect(store.current.snapshot!.switches).toBe("0010");
    expect(store.current.feed).toHaveLength(0); // responses are not feed entries
  });

  it("notifies subscribers and supports unsubscribe", () => {
    const store = new PanelStore();
    let seen = 0;
    const off = store.subscribe(() => seen++);
    store.applyEvent(event("control"));
    off();
    store.applyEvent(event("control"));
    expect(seen).toBe(1);
  });
});

describe("majorityWinner", () => {
  it("requires a full window", () => {
    expect(majorityWinner([4, 4], 3)).toBeNull();
    expect(majorityWinner([], 3)).toBeNull();
  });

  it("requires a strict majority", () => {
    expect(majorityWinner([4, 4, 7], 3)).toBe(4);
    expect(majorityWinner([4, 7, 2], 3)).toBeNull();
    expect(majorityWinner([4, 4, 7, 7], 4)).toBeNull(); // tie
  });

  it("handles unanimous windows", () => {
    expect(majorityWinner([0, 0, 0], 3)).toBe(0);
  });
});
