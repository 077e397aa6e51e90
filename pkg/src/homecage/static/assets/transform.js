/** Pan/zoom between embedding (data) coordinates and canvas pixels.
 *
 * screen = data * scale + offset, per axis; y is flipped so the embedding's
 * +y points up on screen.  The transform stays invertible because scale is
 * clamped to a positive range.
 */
export const MIN_SCALE = 1e-6;
export const MAX_SCALE = 1e9;
export function dataToScreen(view, x, y) {
    return [x * view.scale + view.tx, -y * view.scale + view.ty];
}
export function screenToData(view, sx, sy) {
    return [(sx - view.tx) / view.scale, -(sy - view.ty) / view.scale];
}
/** Zoom by `factor` keeping the screen point (sx, sy) anchored. */
export function zoomAt(view, sx, sy, factor) {
    const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, view.scale * factor));
    const applied = scale / view.scale;
    return {
        scale,
        tx: sx - (sx - view.tx) * applied,
        ty: sy - (sy - view.ty) * applied,
    };
}
export function pan(view, dx, dy) {
    return { scale: view.scale, tx: view.tx + dx, ty: view.ty + dy };
}
/** Fit a bounding box of data coordinates into a width x height canvas. */
export function fitToBounds(xMin, xMax, yMin, yMax, width, height, margin = 20) {
    const spanX = Math.max(xMax - xMin, 1e-9);
    const spanY = Math.max(yMax - yMin, 1e-9);
    const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
    const cx = (xMin + xMax) / 2;
    const cy = (yMin + yMax) / 2;
    return {
        scale,
        tx: width / 2 - cx * scale,
        ty: height / 2 + cy * scale,
    };
}
