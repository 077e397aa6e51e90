/** Pointer gestures to query regions: drag sweeps a rectangle, modifier-drag
 * a disc.  Degenerate (zero-area) gestures produce no region at all. */

import { ViewTransform, screenToData } from "./transform.js";
import { DiscRegion, RectRegion, Region } from "./types.js";

export interface Gesture {
  startX: number; // screen px
  startY: number;
  endX: number;
  endY: number;
  disc: boolean; // modifier held
}

export function gestureToRegion(view: ViewTransform, gesture: Gesture): Region | null {
  const [x0, y0] = screenToData(view, gesture.startX, gesture.startY);
  const [x1, y1] = screenToData(view, gesture.endX, gesture.endY);
  if (gesture.disc) {
    const radius = Math.hypot(x1 - x0, y1 - y0);
    if (radius <= 0) {
      return null;
    }
    const region: DiscRegion = { disc: [x0, y0, radius] };
    return region;
  }
  const xMin = Math.min(x0, x1);
  const xMax = Math.max(x0, x1);
  const yMin = Math.min(y0, y1);
  const yMax = Math.max(y0, y1);
  if (xMin >= xMax || yMin >= yMax) {
    return null;
  }
  const region: RectRegion = { rect: [xMin, xMax, yMin, yMax] };
  return region;
}

/** Track an in-progress drag from pointer events. */
export class BrushTracker {
  private active: Gesture | null = null;

  begin(sx: number, sy: number, disc: boolean): void {
    this.active = { startX: sx, startY: sy, endX: sx, endY: sy, disc };
  }

  move(sx: number, sy: number): Gesture | null {
    if (this.active) {
      this.active.endX = sx;
      this.active.endY = sy;
    }
    return this.active;
  }

  end(view: ViewTransform): Region | null {
    if (!this.active) {
      return null;
    }
    const region = gestureToRegion(view, this.active);
    this.active = null;
    return region;
  }

  current(): Gesture | null {
    return this.active;
  }
}
