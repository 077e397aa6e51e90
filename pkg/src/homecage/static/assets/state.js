/** Top-level client view state.  Everything here is client-local and lost on
 * reload; only labels live on the server. */
export function initialState(view) {
    return {
        view,
        brush: null,
        selectedLabelId: null,
        runId: null,
        colorByVideo: false,
    };
}
export function withBrush(state, brush) {
    return { ...state, brush };
}
export function withView(state, view) {
    return { ...state, view };
}
export function withSelectedLabel(state, id) {
    return { ...state, selectedLabelId: id };
}
