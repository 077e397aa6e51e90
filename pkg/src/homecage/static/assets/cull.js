/** Viewport culling for the scatter renderer.
 *
 * Points live in two parallel Float32Arrays (xs, ys) so a 250k-point pass
 * stays allocation-free; the returned index list drives the draw loop.
 */
import { screenToData } from "./transform.js";
/** Data-space rectangle currently visible on screen. */
export function visibleDataRect(view, viewport) {
    const [x0, y0] = screenToData(view, 0, 0);
    const [x1, y1] = screenToData(view, viewport.width, viewport.height);
    return {
        xMin: Math.min(x0, x1),
        xMax: Math.max(x0, x1),
        yMin: Math.min(y0, y1),
        yMax: Math.max(y0, y1),
    };
}
export function cullVisible(xs, ys, view, viewport, out) {
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
