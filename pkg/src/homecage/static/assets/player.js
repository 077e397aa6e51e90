/** Clip player state machine for ensemble frame sequences. */
export function newPlayer(frameUrls, fps = 12) {
    return { frameUrls, index: 0, playing: false, fps, accumulatorMs: 0 };
}
export function play(state) {
    return { ...state, playing: true };
}
export function pause(state) {
    return { ...state, playing: false };
}
export function scrub(state, index) {
    const clamped = Math.max(0, Math.min(state.frameUrls.length - 1, Math.round(index)));
    return { ...state, index: clamped, accumulatorMs: 0 };
}
export function setFps(state, fps) {
    return { ...state, fps: Math.max(1, Math.min(60, fps)) };
}
/** Advance by elapsed wall time; wraps at the end of the clip. */
export function tick(state, elapsedMs) {
    if (!state.playing || state.frameUrls.length === 0) {
        return state;
    }
    const frameMs = 1000 / state.fps;
    let accumulator = state.accumulatorMs + elapsedMs;
    let index = state.index;
    while (accumulator >= frameMs) {
        accumulator -= frameMs;
        index = (index + 1) % state.frameUrls.length;
    }
    return { ...state, index, accumulatorMs: accumulator };
}
