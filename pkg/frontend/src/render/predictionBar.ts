import { majorityWinner } from "../store.js";
import type { Snapshot } from "../types.js";

/** All class labels as bit strings, in label order (0 .. 2^n - 1). */
export function classBits(n: number): string[] {
  const count = 2 ** n;
  const out: string[] = [];
  for (let label = 0; label < count; label++) {
    out.push(label.toString(2).padStart(n, "0"));
  }
  return out;
}

/**
 * One row per class with a probability bar; the class the automation vote
 * settled on is highlighted. Without a prediction yet, bars stay empty.
 */
export function renderPredictionBar(host: HTMLElement, snapshot: Snapshot | null): void {
  host.innerHTML = "";
  if (!snapshot) return;
  const probs = snapshot.last_prediction ? snapshot.last_prediction.probs : null;
  const winner = majorityWinner(snapshot.prediction_window, snapshot.majority_k);

  classBits(snapshot.n).forEach((bits, label) => {
    const row = document.createElement("div");
    row.className = "pred-row" + (label === winner ? " winner" : "");
    row.dataset.label = String(label);

    const name = document.createElement("span");
    name.className = "pred-bits";
    name.textContent = bits;
    row.appendChild(name);

    const track = document.createElement("span");
    track.className = "pred-track";
    const fill = document.createElement("span");
    fill.className = "pred-fill";
    const p = probs ? probs[label] ?? 0 : 0;
    fill.style.width = `${(p * 100).toFixed(1)}%`;
    track.appendChild(fill);
    row.appendChild(track);

    const value = document.createElement("span");
    value.className = "pred-value";
    value.textContent = probs ? p.toFixed(3) : "-";
    row.appendChild(value);

    host.appendChild(row);
  });
}
