/** DOM wiring for the explorer.
 *
 * Gestures: drag brushes a rectangle, Alt-drag a disc, wheel zooms at the
 * cursor, middle-drag (or Space-drag) pans.  Counts in the side panel are
 * verbatim service responses; the client never recounts membership.
 */

import { ApiClient, ApiError } from "./api.js";
import { BrushTracker } from "./brush.js";
import { EnsembleRunner } from "./ensemble.js";
import { fromServer, LabelListModel, regionOf, selectLabel } from "./labels.js";
import { emptyPanel, panelFromQuery, SelectionPanelModel } from "./panel.js";
import { newPlayer, pause, play, PlayerState, scrub, tick } from "./player.js";
import { renderScatter, ScatterData } from "./scatter.js";
import { initialState, ViewState, withBrush, withView } from "./state.js";
import { dataToScreen, fitToBounds, pan, zoomAt } from "./transform.js";
import { isRect, Region } from "./types.js";

const client = new ApiClient("");
const ensembles = new EnsembleRunner(client);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("scatter");
const overlay = el<HTMLCanvasElement>("overlay");
const banner = el<HTMLDivElement>("banner");
const panelTotal = el<HTMLDivElement>("panel-total");
const panelVideos = el<HTMLUListElement>("panel-videos");
const labelText = el<HTMLInputElement>("label-text");
const labelSave = el<HTMLButtonElement>("label-save");
const labelList = el<HTMLUListElement>("label-list");
const ensembleButton = el<HTMLButtonElement>("ensemble-run");
const ensembleState = el<HTMLDivElement>("ensemble-state");
const playerImg = el<HTMLImageElement>("player-frame");
const playerBar = el<HTMLInputElement>("player-scrub");
const playerToggle = el<HTMLButtonElement>("player-toggle");
const colorToggle = el<HTMLInputElement>("color-by-video");
const retryButton = el<HTMLButtonElement>("banner-retry");

let data: ScatterData | null = null;
let state: ViewState = initialState({ scale: 1, tx: 0, ty: 0 });
let panel: SelectionPanelModel = emptyPanel();
let labels: LabelListModel = { labels: [], selectedId: null };
let player: PlayerState = newPlayer([]);
let highlighted = new Set<number>();
const brush = new BrushTracker();
let panning = false;
let spaceHeld = false;
let lastPan: [number, number] = [0, 0];
const scratch = { cull: undefined as Uint32Array | undefined };

function viewport() {
  return { width: canvas.width, height: canvas.height };
}

function draw() {
  if (!data) return;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  if (!scratch.cull || scratch.cull.length < data.xs.length) {
    scratch.cull = new Uint32Array(data.xs.length);
  }
  renderScatter(
    ctx,
    data,
    state.view,
    viewport(),
    { colorByVideo: state.colorByVideo, highlighted },
    scratch.cull,
  );
  drawOverlay();
}

function drawOverlay() {
  const ctx = overlay.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, overlay.width, overlay.height);

  for (const label of labels.labels) {
    drawRegion(ctx, label.region, label.id === labels.selectedId ? "#ffb300" : "#6aa0ff");
    const bounds = regionScreenBounds(label.region);
    ctx.fillStyle = "#cfe0ff";
    ctx.font = "12px sans-serif";
    ctx.fillText(label.text, bounds.x0 + 4, bounds.y0 - 4);
  }
  if (state.brush) {
    drawRegion(ctx, state.brush, "#ff5577");
  }
  const gesture = brush.current();
  if (gesture) {
    ctx.strokeStyle = "#ff5577";
    ctx.setLineDash([4, 3]);
    if (gesture.disc) {
      const r = Math.hypot(gesture.endX - gesture.startX, gesture.endY - gesture.startY);
      ctx.beginPath();
      ctx.arc(gesture.startX, gesture.startY, r, 0, Math.PI * 2);
      ctx.stroke();
    } else {
      ctx.strokeRect(
        Math.min(gesture.startX, gesture.endX),
        Math.min(gesture.startY, gesture.endY),
        Math.abs(gesture.endX - gesture.startX),
        Math.abs(gesture.endY - gesture.startY),
      );
    }
    ctx.setLineDash([]);
  }
}

function regionScreenBounds(region: Region) {
  if (isRect(region)) {
    const [xMin, xMax, yMin, yMax] = region.rect;
    const [x0, y0] = dataToScreen(state.view, xMin, yMax);
    const [x1, y1] = dataToScreen(state.view, xMax, yMin);
    return { x0, y0, x1, y1 };
  }
  const [cx, cy, r] = region.disc;
  const [x0, y0] = dataToScreen(state.view, cx - r, cy + r);
  const [x1, y1] = dataToScreen(state.view, cx + r, cy - r);
  return { x0, y0, x1, y1 };
}

function drawRegion(ctx: CanvasRenderingContext2D, region: Region, color: string) {
  const bounds = regionScreenBounds(region);
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  if (isRect(region)) {
    ctx.strokeRect(bounds.x0, bounds.y0, bounds.x1 - bounds.x0, bounds.y1 - bounds.y0);
  } else {
    ctx.beginPath();
    ctx.arc(
      (bounds.x0 + bounds.x1) / 2,
      (bounds.y0 + bounds.y1) / 2,
      (bounds.x1 - bounds.x0) / 2,
      0,
      Math.PI * 2,
    );
    ctx.stroke();
  }
}

function showBanner(message: string) {
  banner.style.display = "flex";
  banner.querySelector("span")!.textContent = message;
}

function hideBanner() {
  banner.style.display = "none";
}

function renderPanel() {
  panelTotal.textContent = panel.region
    ? `${panel.total} windows selected`
    : "no selection";
  panelVideos.innerHTML = "";
  for (const { video, count } of panel.perVideo) {
    const item = document.createElement("li");
    item.textContent = `${video}: ${count}`;
    panelVideos.appendChild(item);
  }
  labelSave.disabled = panel.region === null;
  ensembleButton.disabled = panel.region === null;
}

function renderLabels() {
  labelList.innerHTML = "";
  for (const label of labels.labels) {
    const item = document.createElement("li");
    const pick = document.createElement("button");
    pick.textContent = label.text || `label ${label.id}`;
    pick.addEventListener("click", () => restoreLabel(label.id));
    const remove = document.createElement("button");
    remove.textContent = "x";
    remove.className = "delete";
    remove.addEventListener("click", () => removeLabel(label.id));
    item.append(pick, remove);
    labelList.appendChild(item);
  }
  drawOverlay();
}

async function applyBrush(region: Region) {
  state = withBrush(state, region);
  try {
    const response = await client.query(region);
    panel = panelFromQuery(region, response, panel);
    highlighted = new Set(response.ids);
    hideBanner();
  } catch (err) {
    showBanner(`query failed: ${(err as Error).message}`);
  }
  renderPanel();
  draw();
}

async function restoreLabel(id: number) {
  labels = selectLabel(labels, id);
  const region = regionOf(labels, id);
  if (region) {
    await applyBrush(region);
  }
  renderLabels();
}

async function removeLabel(id: number) {
  try {
    await client.deleteLabel(id);
  } catch (err) {
    if (!(err instanceof ApiError && err.status === 404)) {
      showBanner(`delete failed: ${(err as Error).message}`);
    }
  }
  await refreshLabels();
}

async function refreshLabels() {
  try {
    const response = await client.labels();
    labels = fromServer(response.labels, labels);
    renderLabels();
  } catch (err) {
    showBanner(`labels unavailable: ${(err as Error).message}`);
  }
}

async function saveLabel() {
  if (!panel.region) return;
  try {
    await client.createLabel(panel.region, labelText.value);
    labelText.value = "";
    await refreshLabels();
  } catch (err) {
    showBanner(`label save failed: ${(err as Error).message}`);
  }
}

async function runEnsemble() {
  if (!panel.region) return;
  ensembleState.textContent = "submitting...";
  try {
    const status = await ensembles.run(panel.region, {}, (update) => {
      ensembleState.textContent = `job ${update.status}`;
    });
    ensembleState.textContent = `${status.window_count} windows, ${status.n_frames} frames`;
    const urls = (status.frames ?? []).map((u) => u);
    player = newPlayer(urls);
    playerBar.max = String(Math.max(0, urls.length - 1));
    player = play(player);
  } catch (err) {
    ensembleState.textContent = `ensemble failed: ${(err as Error).message}`;
  }
}

function playerLoop(last: number) {
  requestAnimationFrame((now) => {
    player = tick(player, now - last);
    if (player.frameUrls.length > 0) {
      playerImg.src = player.frameUrls[player.index];
      playerBar.value = String(player.index);
    }
    playerLoop(now);
  });
}

async function boot() {
  try {
    const [points, meta] = await Promise.all([client.embedding(), client.meta()]);
    const xs = new Float32Array(points.length);
    const ys = new Float32Array(points.length);
    const videos = new Array<string>(points.length);
    let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
    points.forEach((p, i) => {
      xs[i] = p.x;
      ys[i] = p.y;
      videos[i] = p.video;
      xMin = Math.min(xMin, p.x);
      xMax = Math.max(xMax, p.x);
      yMin = Math.min(yMin, p.y);
      yMax = Math.max(yMax, p.y);
    });
    data = { xs, ys, videos, videoList: meta.videos };
    state = initialState(fitToBounds(xMin, xMax, yMin, yMax, canvas.width, canvas.height));
    hideBanner();
    await refreshLabels();
    draw();
  } catch (err) {
    showBanner(`service unreachable: ${(err as Error).message}`);
  }
}

canvas.addEventListener("pointerdown", (event) => {
  if (event.button === 1 || spaceHeld) {
    panning = true;
    lastPan = [event.offsetX, event.offsetY];
    event.preventDefault();
    return;
  }
  if (event.button === 0) {
    brush.begin(event.offsetX, event.offsetY, event.altKey || event.metaKey);
  }
});

canvas.addEventListener("pointermove", (event) => {
  if (panning) {
    state = withView(
      state,
      pan(state.view, event.offsetX - lastPan[0], event.offsetY - lastPan[1]),
    );
    lastPan = [event.offsetX, event.offsetY];
    draw();
    return;
  }
  if (brush.current()) {
    brush.move(event.offsetX, event.offsetY);
    drawOverlay();
  }
});

canvas.addEventListener("pointerup", async () => {
  if (panning) {
    panning = false;
    return;
  }
  const region = brush.end(state.view);
  drawOverlay();
  if (region) {
    await applyBrush(region); // zero-area gestures return null: no query
  }
});

canvas.addEventListener("wheel", (event) => {
  event.preventDefault();
  const factor = Math.exp(-event.deltaY * 0.0015);
  state = withView(state, zoomAt(state.view, event.offsetX, event.offsetY, factor));
  draw();
});

window.addEventListener("keydown", (e) => {
  if (e.code === "Space") spaceHeld = true;
});
window.addEventListener("keyup", (e) => {
  if (e.code === "Space") spaceHeld = false;
});

labelSave.addEventListener("click", () => void saveLabel());
ensembleButton.addEventListener("click", () => void runEnsemble());
playerToggle.addEventListener("click", () => {
  player = player.playing ? pause(player) : play(player);
  playerToggle.textContent = player.playing ? "pause" : "play";
});
playerBar.addEventListener("input", () => {
  player = pause(scrub(player, Number(playerBar.value)));
  playerToggle.textContent = "play";
});
colorToggle.addEventListener("change", () => {
  state = { ...state, colorByVideo: colorToggle.checked };
  draw();
});
retryButton.addEventListener("click", () => void boot());

playerLoop(performance.now());
void boot();
