/** Zoom/pan math between device (canvas) pixels and image pixels.
 *
 * Targets are a handful of pixels wide, so deep integer zoom with
 * nearest-neighbor rendering is the whole point; the transform is kept exact
 * so a click at 16x lands on the intended pixel.
 */

export const MIN_ZOOM = 1;
export const MAX_ZOOM = 32;

export interface ViewTransform {
  zoom: number;  // device pixels per image pixel
  panX: number;  // device position of image pixel (0, 0)'s top-left corner
  panY: number;
}

export function clampZoom(zoom: number): number {
  return Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, zoom));
}

/** Image pixel under a device point (floor: a pixel owns its whole cell). */
export function screenToImage(t: ViewTransform, sx: number, sy: number): { x: number; y: number } {
  return {
    x: Math.floor((sx - t.panX) / t.zoom),
    y: Math.floor((sy - t.panY) / t.zoom),
  };
}

/** Device position of an image pixel's top-left corner. */
export function imageToScreen(t: ViewTransform, ix: number, iy: number): { x: number; y: number } {
  return { x: ix * t.zoom + t.panX, y: iy * t.zoom + t.panY };
}

/** Device position of an image pixel's center. */
export function imageCenterToScreen(t: ViewTransform, ix: number, iy: number): { x: number; y: number } {
  return { x: (ix + 0.5) * t.zoom + t.panX, y: (iy + 0.5) * t.zoom + t.panY };
}

/** Rescale around a device-space anchor so the image point under it stays put. */
export function zoomAt(t: ViewTransform, nextZoom: number, sx: number, sy: number): ViewTransform {
  const zoom = clampZoom(nextZoom);
  const scale = zoom / t.zoom;
  return {
    zoom,
    panX: sx - (sx - t.panX) * scale,
    panY: sy - (sy - t.panY) * scale,
  };
}

export function pan(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { zoom: t.zoom, panX: t.panX + dx, panY: t.panY + dy };
}

/** Initial transform: whole image visible and centered, zoom at least 1. */
export function fitView(imageW: number, imageH: number, viewW: number, viewH: number): ViewTransform {
  const zoom = clampZoom(Math.floor(Math.min(viewW / imageW, viewH / imageH)) || 1);
  return {
    zoom,
    panX: Math.floor((viewW - imageW * zoom) / 2),
    panY: Math.floor((viewH - imageH * zoom) / 2),
  };
}
