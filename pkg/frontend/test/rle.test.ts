import assert from "node:assert/strict";
import { test } from "node:test";

import { countPixels, decodeRle, encodeRle, overlayRgba, type RleRows } from "../src/rle.js";

test("decode simple runs", () => {
  const rows: RleRows = [[[0, 2]], [], [[3, 1]]];
  const bits = decodeRle(rows, 4, 3);
  assert.deepEqual(Array.from(bits), [1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
  assert.equal(countPixels(bits), 3);
});

test("decode rejects bad geometry", () => {
  assert.throws(() => decodeRle([[[0, 9]]], 4, 1), /exceeds/);
  assert.throws(() => decodeRle([], 4, 2), /rows/);
  assert.throws(() => decodeRle([[[-1, 2]]], 4, 1), /exceeds/);
});

test("encode/decode round-trips random grids", () => {
  let seed = 99;
  const rand = () => {
    seed = (seed * 1664525 + 1013904223) >>> 0;
    return seed / 2 ** 32;
  };
  for (let k = 0; k < 50; k++) {
    const w = 1 + Math.floor(rand() * 24);
    const h = 1 + Math.floor(rand() * 24);
    const bits = new Uint8Array(w * h).map(() => (rand() < 0.35 ? 1 : 0));
    const back = decodeRle(encodeRle(bits, w, h), w, h);
    assert.deepEqual(Array.from(back), Array.from(bits));
  }
});

test("overlay buffer colors exactly the mask pixels", () => {
  const bits = Uint8Array.from([1, 0, 0, 1]);
  const rgba = overlayRgba(bits, 2, 2, [255, 64, 96], 0.5);
  assert.deepEqual(Array.from(rgba.slice(0, 4)), [255, 64, 96, 128]);
  assert.deepEqual(Array.from(rgba.slice(4, 8)), [0, 0, 0, 0]);
  assert.deepEqual(Array.from(rgba.slice(12, 16)), [255, 64, 96, 128]);
});
