/** Label list handling: server order is display order, and clicking a label
 * restores its region as the active brush. */
import { isRect } from "./types.js";
export function fromServer(labels, previous) {
    const selected = previous?.selectedId ?? null;
    return {
        labels: [...labels],
        selectedId: labels.some((l) => l.id === selected) ? selected : null,
    };
}
export function selectLabel(model, id) {
    if (!model.labels.some((l) => l.id === id)) {
        return { ...model, selectedId: null };
    }
    return { ...model, selectedId: id };
}
/** The region a clicked label restores as the active brush. */
export function regionOf(model, id) {
    const label = model.labels.find((l) => l.id === id);
    return label ? label.region : null;
}
/** Data-space bounding box used to draw a label outline. */
export function labelBounds(region) {
    if (isRect(region)) {
        const [xMin, xMax, yMin, yMax] = region.rect;
        return { xMin, xMax, yMin, yMax };
    }
    const [cx, cy, r] = region.disc;
    return { xMin: cx - r, xMax: cx + r, yMin: cy - r, yMax: cy + r };
}
