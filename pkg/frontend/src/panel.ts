/** Selection panel state: nothing here is computed client-side; counts are
 * copied verbatim from the service's query response. */

import { QueryResponse, Region } from "./types.js";

export interface SelectionPanelModel {
  region: Region | null;
  memberIds: number[];
  total: number;
  perVideo: Array<{ video: string; count: number }>;
  labelDraft: string;
  ensembleStatus: string;
}

export function emptyPanel(): SelectionPanelModel {
  return {
    region: null,
    memberIds: [],
    total: 0,
    perVideo: [],
    labelDraft: "",
    ensembleStatus: "",
  };
}

export function panelFromQuery(
  region: Region,
  response: QueryResponse,
  previous?: SelectionPanelModel,
): SelectionPanelModel {
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
