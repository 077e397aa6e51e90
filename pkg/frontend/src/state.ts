/** Top-level client view state.  Everything here is client-local and lost on
 * reload; only labels live on the server. */

import { ViewTransform } from "./transform.js";
import { Region } from "./types.js";

export interface ViewState {
  view: ViewTransform;
  brush: Region | null;
  selectedLabelId: number | null;
  runId: string | null; // sweep output being inspected, when comparing runs
  colorByVideo: boolean;
}

export function initialState(view: ViewTransform): ViewState {
  return {
    view,
    brush: null,
    selectedLabelId: null,
    runId: null,
    colorByVideo: false,
  };
}

export function withBrush(state: ViewState, brush: Region | null): ViewState {
  return { ...state, brush };
}

export function withView(state: ViewState, view: ViewTransform): ViewState {
  return { ...state, view };
}

export function withSelectedLabel(state: ViewState, id: number | null): ViewState {
  return { ...state, selectedLabelId: id };
}
