/** Viewport culling for the scatter renderer.
 *
 * Points live in two parallel Float32Arrays (xs, ys) so a 250k-point pass
 * stays allocation-free; the returned index list drives the draw loop.
 */

import { ViewTransform, screenToData } from "./transform.js";

export interface Viewport {
  width: number;
  height: number;
}

/** Data-space rectangle currently visible on screen. */
export function visibleDataRect(
  view: ViewTransform,
  viewport: Viewport,
): { xMin: number; xMax: number; yMin: number; yMax: number } {
  const [x0, y0] = screenToData(view, 0, 0);
  const [x1, y1] = screenToData(view, viewport.width, viewport.height);
  return {
    xMin: Math.min(x0, x1),
    xMax: Math.max(x0, x1),
    yMin: Math.min(y0, y1),
    yMax: Math.max(y0, y1),
  };
}

export function cullVisible(
  xs: Float32Array,
  ys: Float32Array,
  view: ViewTransform,
  viewport: Viewport,
  out?: Uint32Array,
): { indices: Uint32Array; count: number } {
  const rect = visibleDataRect(view, viewport);
  const indices = out && out.length >= xs.length ? out : new Uint32Array(xs.length);
  let count = 0;
  for (let i = 0; i < xs.length; i++) {
    const x = xs[i];
    const y = ys[i];
    if (x >= rect.xMin && x <= rect.xMax && y >= rect.yMin && y <= rect.yMax) {
      indices[count++] = i;
    }
  }
  return { indices, count };
}
