// The gateway serves camera frames as binary PGM (P5, 8-bit).

export interface GrayImage {
  width: number;
  height: number;
  pixels: Uint8Array;
}

/** Decode a binary P5 PGM payload. */
export function decodePgm(data: ArrayBuffer): GrayImage {
  const bytes = new Uint8Array(data);
  if (bytes[0] !== 0x50 || bytes[1] !== 0x35) {
    throw new Error("not a binary PGM (P5) payload");
  }
  const fields: number[] = [];
  let pos = 2;
  while (fields.length < 3) {
    while (pos < bytes.length && isSpace(bytes[pos]!)) pos++;
    if (bytes[pos] === 0x23) {
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++; // comment line
      continue;
    }
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos]!)) pos++;
    if (start === pos) throw new Error("truncated PGM header");
    fields.push(parseInt(ascii(bytes, start, pos), 10));
  }
  pos++; // single whitespace byte after maxval
  const [width, height, maxval] = fields as [number, number, number];
  if (maxval !== 255) throw new Error(`unsupported maxval ${maxval}`);
  const pixels = bytes.slice(pos, pos + width * height);
  if (pixels.length !== width * height) {
    throw new Error(`expected ${width * height} pixels, got ${pixels.length}`);
  }
  return { width, height, pixels };
}

let contextUnavailable = false;

/** Paint a grayscale image onto a canvas; no-op where 2D contexts are absent. */
export function paintGray(canvas: HTMLCanvasElement, image: GrayImage): void {
  canvas.width = image.width;
  canvas.height = image.height;
  if (contextUnavailable) return;
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    contextUnavailable = true; // headless DOM; don't probe on every frame
    return;
  }
  const rgba = ctx.createImageData(image.width, image.height);
  for (let i = 0; i < image.pixels.length; i++) {
    const v = image.pixels[i]!;
    rgba.data[i * 4] = v;
    rgba.data[i * 4 + 1] = v;
    rgba.data[i * 4 + 2] = v;
    rgba.data[i * 4 + 3] = 255;
  }
  ctx.putImageData(rgba, 0, 0);
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

function ascii(bytes: Uint8Array, start: number, end: number): string {
  let out = "";
  for (let i = start; i < end; i++) out += String.fromCharCode(bytes[i]!);
  return out;
}
