/** Selection panel state: nothing here is computed client-side; counts are
 * copied verbatim from the service's query response. */
export function emptyPanel() {
    return {
        region: null,
        memberIds: [],
        total: 0,
        perVideo: [],
        labelDraft: "",
        ensembleStatus: "",
    };
}
export function panelFromQuery(region, response, previous) {
    return {
        region,
        memberIds: response.ids,
        total: response.total,
        perVideo: Object.entries(response.counts)
            .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
            .map(([video, count]) => ({ video, count })),
        labelDraft: previous?.labelDraft ?? "",
        ensembleStatus: "",
    };
}
