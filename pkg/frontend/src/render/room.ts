import type { Snapshot } from "../types.js";

// Stylized top-down map of the room on the camera's 64x64 grid (x = column,
// y = row). Zones and light positions are fixed decor; the only live parts
// are the four light glyphs and the occupant marker.

const SVG_NS = "http://www.w3.org/2000/svg";

interface Zone {
  label: string;
  x: number;
  y: number;
  w: number;
  h: number;
}

const ZONES: Zone[] = [
  { label: "piano", x: 2, y: 2, w: 22, h: 26 },
  { label: "mirror", x: 40, y: 2, w: 23, h: 18 },
  { label: "desk", x: 36, y: 24, w: 27, h: 18 },
  { label: "sofa", x: 2, y: 40, w: 28, h: 22 },
  { label: "door", x: 42, y: 52, w: 21, h: 11 },
];

// Where each ceiling light hangs: c1 is the piano spotlight, c2 lights the
// sofa corner, c3 the open floor, c4 the desk with the monitor.
const LIGHTS: { x: number; y: number }[] = [
  { x: 13, y: 15 },
  { x: 16, y: 51 },
  { x: 32, y: 32 },
  { x: 50, y: 33 },
];

// Marker anchor per scene; A00 leaves the room empty.
const SCENE_ANCHORS: Record<string, { x: number; y: number } | null> = {
  A00: null,
  A10: { x: 32, y: 34 },
  A11: { x: 52, y: 12 },
  A20: { x: 25, y: 28 },
  A21: { x: 29, y: 28 },
  A22: { x: 33, y: 28 },
  A23: { x: 55, y: 33 },
  A30: { x: 10, y: 50 },
  A31: { x: 18, y: 50 },
  A32: { x: 24, y: 52 },
  A40: { x: 10, y: 14 },
  A41: { x: 14, y: 16 },
  A42: { x: 18, y: 14 },
};

function el(name: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

/** Rebuild the schematic from a snapshot; a null snapshot draws decor only. */
export function renderRoom(host: HTMLElement, snapshot: Snapshot | null): void {
  host.innerHTML = "";
  const svg = el("svg", { viewBox: "0 0 64 64", class: "room-svg" });

  svg.appendChild(
    el("rect", { x: "0", y: "0", width: "64", height: "64", class: "room-floor" }),
  );
  for (const zone of ZONES) {
    svg.appendChild(
      el("rect", {
        x: String(zone.x),
        y: String(zone.y),
        width: String(zone.w),
        height: String(zone.h),
        class: "room-zone",
      }),
    );
    const label = el("text", {
      x: String(zone.x + 1.5),
      y: String(zone.y + 4),
      class: "zone-label",
    });
    label.textContent = zone.label;
    svg.appendChild(label);
  }

  const controls = snapshot ? snapshot.controls : "";
  LIGHTS.forEach((pos, i) => {
    const lit = controls.charAt(i) === "1";
    const glyph = el("circle", {
      cx: String(pos.x),
      cy: String(pos.y),
      r: "3.2",
      class: `light-glyph ${lit ? "lit" : "unlit"}`,
      "data-light": String(i + 1),
    });
    svg.appendChild(glyph);
    const label = el("text", {
      x: String(pos.x),
      y: String(pos.y + 7),
      "text-anchor": "middle",
      class: "light-label",
    });
    label.textContent = `c${i + 1}`;
    svg.appendChild(label);
  });

  const anchor = snapshot ? SCENE_ANCHORS[snapshot.scene] : null;
  if (anchor) {
    svg.appendChild(
      el("circle", {
        cx: String(anchor.x),
        cy: String(anchor.y),
        r: "2.2",
        class: "occupant",
        "data-scene": snapshot!.scene,
      }),
    );
  }

  host.appendChild(svg);
}
