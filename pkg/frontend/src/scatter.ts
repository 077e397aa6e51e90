/** Canvas scatter rendering: small translucent points so dense stereotyped
 * clusters read as density, exactly the idiom the embedding is meant for.
 *
 * The renderer takes a narrow drawing interface so tests can count draw
 * calls without a real canvas.
 */

import { cullVisible, Viewport } from "./cull.js";
import { hueCss, videoHues } from "./colors.js";
import { dataToScreen, ViewTransform } from "./transform.js";

export const POINT_SIZE = 2;
export const POINT_ALPHA = 0.35;

export interface DrawSurface {
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
}

export interface ScatterData {
  xs: Float32Array;
  ys: Float32Array;
  videos: string[]; // per point
  videoList: string[];
}

export interface ScatterOptions {
  colorByVideo: boolean;
  highlighted?: Set<number>;
}

export function renderScatter(
  ctx: DrawSurface,
  data: ScatterData,
  view: ViewTransform,
  viewport: Viewport,
  options: ScatterOptions,
  scratch?: Uint32Array,
): number {
  ctx.clearRect(0, 0, viewport.width, viewport.height);
  const { indices, count } = cullVisible(data.xs, data.ys, view, viewport, scratch);
  const hues = options.colorByVideo ? videoHues(data.videoList) : null;
  const base = `rgba(120, 144, 180, ${POINT_ALPHA})`;
  const highlight = "rgba(255, 170, 0, 0.9)";

  ctx.fillStyle = base;
  let currentStyle = base;
  for (let c = 0; c < count; c++) {
    const i = indices[c];
    let style = base;
    if (options.highlighted?.has(i)) {
      style = highlight;
    } else if (hues) {
      style = hueCss(hues.get(data.videos[i]) ?? 0, POINT_ALPHA);
    }
    if (style !== currentStyle) {
      ctx.fillStyle = style;
      currentStyle = style;
    }
    const [sx, sy] = dataToScreen(view, data.xs[i], data.ys[i]);
    ctx.fillRect(sx, sy, POINT_SIZE, POINT_SIZE);
  }
  return count;
}
