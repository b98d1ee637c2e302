import type { CatalogEntry, GatewayEvent, Snapshot, TrainResult } from "./types.js";

export const FEED_LIMIT = 100;

export interface PanelState {
  connected: boolean;
  retryMs: number | null;
  snapshot: Snapshot | null;
  catalog: CatalogEntry[];
  feed: GatewayEvent[];
  train: TrainResult | null;
  toast: string | null;
}

type Listener = (state: PanelState) => void;

/**
 * Single source of truth for the panel. Snapshots enter only from the event
 * stream or from mutation responses, both of which the server produced, so
 * the displayed state is always something the gateway actually applied.
 */
export class PanelStore {
  private state: PanelState = {
    connected: false,
    retryMs: null,
    snapshot: null,
    catalog: [],
    feed: [],
    train: null,
    toast: null,
  };
  private listeners: Listener[] = [];

  get current(): PanelState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** Stream record: every kind joins the feed, snapshots replace the mirror. */
  applyEvent(event: GatewayEvent): void {
    const feed = [...this.state.feed, event].slice(-FEED_LIMIT);
    let snapshot = this.state.snapshot;
    if (event.kind === "hello" || event.kind === "state") {
      snapshot = event.payload as unknown as Snapshot;
    }
    this.state = { ...this.state, feed, snapshot };
    this.emit();
  }

  /** Mutation response: the snapshot the server applied, never a local guess. */
  applySnapshot(snapshot: Snapshot): void {
    this.state = { ...this.state, snapshot };
    this.emit();
  }

  setConnection(connected: boolean, retryMs?: number): void {
    if (
      connected === this.state.connected &&
      (retryMs ?? null) === this.state.retryMs
    ) {
      return;
    }
    this.state = { ...this.state, connected, retryMs: connected ? null : retryMs ?? null };
    this.emit();
  }

  setCatalog(catalog: CatalogEntry[]): void {
    this.state = { ...this.state, catalog };
    this.emit();
  }

  setTrainResult(train: TrainResult): void {
    this.state = { ...this.state, train };
    this.emit();
  }

  showToast(message: string): void {
    this.state = { ...this.state, toast: message };
    this.emit();
  }

  clearToast(): void {
    if (this.state.toast === null) return;
    this.state = { ...this.state, toast: null };
    this.emit();
  }
}

/**
 * Label the automation vote would act on: the window must be full and one
 * label must hold a strict majority, matching the controller's rule.
 */
export function majorityWinner(window: number[], k: number): number | null {
  if (window.length < k || window.length === 0) return null;
  const counts = new Map<number, number>();
  for (const label of window) counts.set(label, (counts.get(label) ?? 0) + 1);
  let best = -1;
  let bestCount = 0;
  for (const [label, count] of counts) {
    if (count > bestCount) {
      best = label;
      bestCount = count;
    }
  }
  return bestCount * 2 > window.length ? best : null;
}
