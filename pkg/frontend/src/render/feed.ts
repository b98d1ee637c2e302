import type { GatewayEvent } from "../types.js";

// The feed shows the stream as received: every record, in order, capped at
// the store's limit. Summaries keep one line per event.

function summarize(event: GatewayEvent): string {
  const p = event.payload;
  switch (event.kind) {
    case "hello":
      return "connected, snapshot received";
    case "state":
      return `mode=${p.mode} switches=${p.switches} controls=${p.controls}`;
    case "control":
      return `controls -> ${p.bits}`;
    case "sample":
      return `recorded ${p.bits} (${p.scene} run ${p.run}, ${p.source})`;
    case "prediction":
      return `predicted ${p.bits}`;
    case "scene":
      return `scene -> ${p.scene} run ${p.run}`;
    case "clock":
      return `clock paused=${p.paused} rate=${p.rate}`;
    case "model":
      return `trained on ${p.samples} samples, final loss ${Number(p.final_loss).toFixed(4)}`;
    default:
      return JSON.stringify(p);
  }
}

/** Rebuild the feed list, newest entry last, and keep it scrolled there. */
export function renderFeed(host: HTMLElement, feed: GatewayEvent[]): void {
  host.innerHTML = "";
  for (const event of feed) {
    const row = document.createElement("li");
    row.className = `feed-row feed-${event.kind}`;
    const kind = document.createElement("span");
    kind.className = "feed-kind";
    kind.textContent = event.kind;
    row.appendChild(kind);
    const text = document.createElement("span");
    text.className = "feed-text";
    text.textContent = summarize(event);
    row.appendChild(text);
    host.appendChild(row);
  }
  host.scrollTop = host.scrollHeight;
}
