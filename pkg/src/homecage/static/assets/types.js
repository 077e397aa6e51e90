/** Wire types mirroring the service API. */
export function isRect(region) {
    return region.rect !== undefined;
}
export function regionKey(region) {
    return JSON.stringify(region);
}
