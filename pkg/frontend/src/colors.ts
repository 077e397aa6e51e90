/** Deterministic per-video hues for the color-by-video mode. */

const GOLDEN_ANGLE = 137.50776405003785;

export function videoHues(videos: string[]): Map<string, number> {
  const hues = new Map<string, number>();
  const sorted = [...videos].sort();
  sorted.forEach((video, i) => {
    hues.set(video, (i * GOLDEN_ANGLE) % 360);
  });
  return hues;
}

export function hueCss(hue: number, alpha: number): string {
  return `hsla(${hue.toFixed(2)}, 80%, 55%, ${alpha})`;
}
