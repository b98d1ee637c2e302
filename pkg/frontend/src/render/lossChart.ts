import type { TrainResult } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 260;
const HEIGHT = 90;
const PAD = 6;

/** Polyline of the per-epoch loss from the most recent training response. */
export function renderLossChart(host: HTMLElement, train: TrainResult | null): void {
  host.innerHTML = "";
  if (!train || train.loss_trace.length === 0) {
    const hint = document.createElement("p");
    hint.className = "chart-hint";
    hint.textContent = "No training run yet.";
    host.appendChild(hint);
    return;
  }

  const trace = train.loss_trace;
  const lo = Math.min(...trace);
  const hi = Math.max(...trace);
  const span = hi - lo || 1;
  const step = trace.length > 1 ? (WIDTH - 2 * PAD) / (trace.length - 1) : 0;
  const points = trace
    .map((loss, i) => {
      const x = PAD + i * step;
      const y = PAD + ((hi - loss) / span) * (HEIGHT - 2 * PAD);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", "loss-svg");
  const line = document.createElementNS(SVG_NS, "polyline");
  line.setAttribute("points", points);
  line.setAttribute("class", "loss-line");
  svg.appendChild(line);
  host.appendChild(svg);

  const caption = document.createElement("p");
  caption.className = "chart-caption";
  const last = trace[trace.length - 1]!;
  caption.textContent = `${train.samples} samples, ${train.epochs} epochs, final loss ${last.toFixed(4)}`;
  host.appendChild(caption);
}
