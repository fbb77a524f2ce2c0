/** Run-length mask wire format: per image row, a list of [start, length] runs. */

export type RleRows = [number, number][][];

/** Decode run-length rows into a row-major 0/1 byte grid. */
export function decodeRle(rows: RleRows, width: number, height: number): Uint8Array {
  if (rows.length !== height) {
    throw new Error(`run-length mask has ${rows.length} rows, expected ${height}`);
  }
  const bits = new Uint8Array(width * height);
  for (let r = 0; r < height; r++) {
    for (const [start, length] of rows[r]) {
      if (start < 0 || length < 0 || start + length > width) {
        throw new Error(`run [${start}, ${length}] exceeds row width ${width}`);
      }
      bits.fill(1, r * width + start, r * width + start + length);
    }
  }
  return bits;
}

export function encodeRle(bits: Uint8Array, width: number, height: number): RleRows {
  const rows: RleRows = [];
  for (let r = 0; r < height; r++) {
    const runs: [number, number][] = [];
    let start = -1;
    for (let c = 0; c < width; c++) {
      const on = bits[r * width + c] !== 0;
      if (on && start < 0) start = c;
      if (!on && start >= 0) {
        runs.push([start, c - start]);
        start = -1;
      }
    }
    if (start >= 0) runs.push([start, width - start]);
    rows.push(runs);
  }
  return rows;
}

export function countPixels(bits: Uint8Array): number {
  let n = 0;
  for (let i = 0; i < bits.length; i++) n += bits[i];
  return n;
}

/** RGBA overlay buffer for ImageData: colored where the mask is on. */
export function overlayRgba(
  bits: Uint8Array, width: number, height: number,
  color: [number, number, number], alpha: number,
): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  const a = Math.round(Math.min(1, Math.max(0, alpha)) * 255);
  for (let i = 0; i < bits.length; i++) {
    if (bits[i]) {
      out[i * 4] = color[0];
      out[i * 4 + 1] = color[1];
      out[i * 4 + 2] = color[2];
      out[i * 4 + 3] = a;
    }
  }
  return out;
}
