/** Clip player state machine for ensemble frame sequences. */

export interface PlayerState {
  frameUrls: string[];
  index: number;
  playing: boolean;
  fps: number;
  accumulatorMs: number;
}

export function newPlayer(frameUrls: string[], fps = 12): PlayerState {
  return { frameUrls, index: 0, playing: false, fps, accumulatorMs: 0 };
}

export function play(state: PlayerState): PlayerState {
  return { ...state, playing: true };
}

export function pause(state: PlayerState): PlayerState {
  return { ...state, playing: false };
}

export function scrub(state: PlayerState, index: number): PlayerState {
  const clamped = Math.max(0, Math.min(state.frameUrls.length - 1, Math.round(index)));
  return { ...state, index: clamped, accumulatorMs: 0 };
}

export function setFps(state: PlayerState, fps: number): PlayerState {
  return { ...state, fps: Math.max(1, Math.min(60, fps)) };
}

/** Advance by elapsed wall time; wraps at the end of the clip. */
export function tick(state: PlayerState, elapsedMs: number): PlayerState {
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
