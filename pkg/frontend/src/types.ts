/** Wire types mirroring the service API. */

export interface EmbedPoint {
  id: number;
  x: number;
  y: number;
  video: string;
  start: number;
}

export interface Meta {
  n_points: number;
  omega: number;
  stride: number;
  bodyparts: string[];
  n_neighbors: number;
  min_dist: number;
  videos: string[];
  has_frames: boolean;
}

export interface RectRegion {
  rect: [number, number, number, number]; // x_min, x_max, y_min, y_max
}

export interface DiscRegion {
  disc: [number, number, number]; // cx, cy, radius
}

export type Region = RectRegion | DiscRegion;

export interface QueryResponse {
  ids: number[];
  counts: Record<string, number>;
  total: number;
}

export interface LabelRecord {
  id: number;
  region: Region;
  text: string;
  author: string;
  created_at: string;
}

export interface EnsembleRequest {
  low?: number;
  high?: number;
  sigma?: number;
}

export type JobStatus = "pending" | "running" | "done" | "error";

export interface EnsembleStatus {
  job: string;
  status: JobStatus;
  error?: string;
  n_frames?: number;
  window_count?: number;
  frames?: string[];
}

export function isRect(region: Region): region is RectRegion {
  return (region as RectRegion).rect !== undefined;
}

export function regionKey(region: Region): string {
  return JSON.stringify(region);
}
