/**
 * Overlay construction: labels -> RGBA pixels for the viewport canvas.
 * The overlay paints exactly the nonzero (and selected) label pixels; the
 * integration test holds the painted count equal to the PNG's nonzero
 * count, so nothing here may approximate.
 */

import type { LabelImage } from "./png16.js";

/** Background is transparent; object colors cycle through this table. */
export const OBJECT_COLORS: ReadonlyArray<readonly [number, number, number]> = [
  [230, 60, 60], [60, 180, 75], [65, 105, 225], [255, 200, 40],
  [170, 70, 200], [70, 210, 210], [240, 120, 40], [150, 220, 90],
  [220, 90, 160], [110, 110, 255], [160, 120, 60], [90, 90, 90],
];

export function colorFor(objectId: number): readonly [number, number, number] {
  return OBJECT_COLORS[(objectId - 1) % OBJECT_COLORS.length];
}

export interface Overlay {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
  /** Number of painted (non-transparent) pixels. */
  pixelCount: number;
}

/**
 * Paint the mask into an RGBA buffer. When `selected` is given, only
 * those object IDs are painted; otherwise every nonzero label is.
 */
export function buildOverlay(
  image: LabelImage,
  selected?: ReadonlySet<number>,
): Overlay {
  const { width, height, labels } = image;
  const rgba = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  let pixelCount = 0;
  for (let i = 0; i < labels.length; i++) {
    const id = labels[i];
    if (id === 0 || (selected !== undefined && !selected.has(id))) {
      continue;
    }
    const [r, g, b] = colorFor(id);
    rgba[4 * i] = r;
    rgba[4 * i + 1] = g;
    rgba[4 * i + 2] = b;
    rgba[4 * i + 3] = 255;
    pixelCount++;
  }
  return { width, height, rgba, pixelCount };
}

/** Count of nonzero labels in a decoded mask (the server-truth number). */
export function nonzeroCount(image: LabelImage): number {
  let n = 0;
  for (let i = 0; i < image.labels.length; i++) {
    if (image.labels[i] !== 0) n++;
  }
  return n;
}
