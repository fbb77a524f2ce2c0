/** Browser annotation workbench: page through images, deep-zoom, click once,
 * inspect the returned overlay, accept or re-click, export. */

import { ApiClient, ApiError, type AnnotateResponse, type RoiRect } from "./api.js";
import { decodeRle, overlayRgba } from "./rle.js";
import {
  MAX_ZOOM, MIN_ZOOM, type ViewTransform, clampZoom, fitView, pan,
  screenToImage, zoomAt,
} from "./view.js";
import { Workbench } from "./state.js";

const api = new ApiClient("");
const bench = new Workbench();

const canvas = document.getElementById("canvas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const listEl = document.getElementById("image-list")!;
const bannerEl = document.getElementById("banner")!;
const statusEl = document.getElementById("status")!;
const diagEl = document.getElementById("diagnostics")!;
const acceptBtn = document.getElementById("accept") as HTMLButtonElement;
const clearBtn = document.getElementById("clear") as HTMLButtonElement;
const exportBtn = document.getElementById("export") as HTMLButtonElement;
const blinkBtn = document.getElementById("blink") as HTMLButtonElement;
const opacityEl = document.getElementById("opacity") as HTMLInputElement;
const coordEl = document.getElementById("coords")!;

let view: ViewTransform = { zoom: 1, panX: 0, panY: 0 };
let image: HTMLImageElement | null = null;
let overlayCanvas: HTMLCanvasElement | null = null;
let pendingRoi: RoiRect | null = null;
let guidanceRoi: RoiRect | null = null;
let blinkOn = true;
let blinkTimer: number | null = null;
let requestSeq = 0;     // later clicks cancel the pending render, not the request
let inFlight = false;

function setBanner(text: string | null): void {
  bannerEl.textContent = text ?? "";
  bannerEl.classList.toggle("hidden", !text);
}

function setStatus(text: string): void {
  statusEl.textContent = text;
}

function paramInput(name: "alpha" | "beta" | "delta" | "i"): HTMLInputElement {
  return document.getElementById(`param-${name}`) as HTMLInputElement;
}

function render(): void {
  ctx.imageSmoothingEnabled = false;  // single pixels must stay visible
  ctx.fillStyle = "#14171c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (!image) return;
  ctx.save();
  ctx.translate(view.panX, view.panY);
  ctx.scale(view.zoom, view.zoom);
  ctx.drawImage(image, 0, 0);
  if (overlayCanvas && blinkOn) {
    ctx.drawImage(overlayCanvas, 0, 0);
  }
  ctx.restore();

  const roi = pendingRoi ?? guidanceRoi;
  if (roi) {
    ctx.strokeStyle = pendingRoi ? "#4cc9f0" : "#f4a261";
    ctx.lineWidth = 1.5;
    ctx.setLineDash([6, 4]);
    ctx.strokeRect(
      roi.left * view.zoom + view.panX,
      roi.top * view.zoom + view.panY,
      roi.width * view.zoom,
      roi.height * view.zoom,
    );
    ctx.setLineDash([]);
  }
}

function rebuildOverlay(response: AnnotateResponse): void {
  const { width, height, rle } = response.mask;
  const bits = decodeRle(rle, width, height);
  const rgba = overlayRgba(bits, width, height, [255, 64, 96],
                           parseFloat(opacityEl.value));
  const off = document.createElement("canvas");
  off.width = width;
  off.height = height;
  off.getContext("2d")!.putImageData(new ImageData(rgba, width, height), 0, 0);
  overlayCanvas = off;
  pendingRoi = response.roi;
  guidanceRoi = null;
}

function renderCatalog(): void {
  listEl.replaceChildren();
  bench.catalog.forEach((entry, idx) => {
    const item = document.createElement("div");
    item.className = "entry" + (idx === bench.currentIndex ? " selected" : "");
    const thumb = document.createElement("img");
    thumb.src = api.imageUrl(entry.image_id);
    thumb.loading = "lazy";
    const label = document.createElement("span");
    label.textContent = entry.image_id;
    const badge = document.createElement("span");
    badge.className = "badge" + (entry.annotated ? " on" : "");
    badge.textContent = entry.annotated ? "annotated" : "pending";
    item.append(thumb, label, badge);
    item.addEventListener("click", () => {
      bench.select(idx);
      loadCurrent();
    });
    listEl.append(item);
  });
}

async function loadCurrent(): Promise<void> {
  const entry = bench.current;
  overlayCanvas = null;
  pendingRoi = null;
  guidanceRoi = null;
  acceptBtn.disabled = true;
  diagEl.textContent = "";
  renderCatalog();
  if (!entry) {
    image = null;
    render();
    return;
  }
  const img = new Image();
  img.src = api.imageUrl(entry.image_id);
  try {
    await img.decode();
  } catch {
    setBanner("cannot load image from the service — retry when it is back");
    return;
  }
  image = img;
  view = fitView(entry.width, entry.height, canvas.width, canvas.height);
  setStatus(`${entry.image_id}  ${entry.width}x${entry.height}  zoom ${view.zoom}x`);
  render();
}

async function clickToAnnotate(sx: number, sy: number): Promise<void> {
  const entry = bench.current;
  if (!entry || inFlight) return;
  const { x, y } = screenToImage(view, sx, sy);
  if (x < 0 || y < 0 || x >= entry.width || y >= entry.height) return;
  const seq = ++requestSeq;
  inFlight = true;
  setStatus(`annotating ${entry.image_id} at (${x}, ${y})...`);
  try {
    const response = await api.annotate(entry.image_id, x, y,
                                        bench.overridesPayload());
    if (seq !== requestSeq) return;  // a newer click superseded this render
    bench.setPending(response);
    rebuildOverlay(response);
    acceptBtn.disabled = !bench.canAccept;
    diagEl.textContent =
      `iterations ${response.iterations}` +
      `${response.converged ? ", converged" : ""}` +
      `${response.oscillating ? ", oscillating" : ""}\n` +
      `c1 ${response.c1.toFixed(4)}   c2 ${response.c2.toFixed(4)}`;
    setStatus(`overlay ready for ${entry.image_id} — accept or re-click`);
    setBanner(null);
  } catch (err) {
    if (seq !== requestSeq) return;
    if (err instanceof ApiError && err.status === 409) {
      guidanceRoi = err.roi;
      overlayCanvas = null;
      pendingRoi = null;
      setStatus("no target near this click — click closer or lower the threshold i");
    } else if (err instanceof ApiError) {
      setStatus(`annotate failed: ${err.message}`);
    } else {
      setBanner("service unreachable — check the connection and retry");
    }
  } finally {
    if (seq === requestSeq) inFlight = false;
    render();
  }
}

async function acceptPending(): Promise<void> {
  if (!bench.canAccept || !bench.pending) return;
  const { imageId, response } = bench.pending;
  try {
    await api.accept(imageId, response.mask);
  } catch (err) {
    setStatus(`accept failed: ${err instanceof Error ? err.message : err}`);
    return;
  }
  bench.markAcceptedAndAdvance();
  await loadCurrent();
  setStatus(`accepted ${imageId}`);
}

async function clearAccepted(): Promise<void> {
  const entry = bench.current;
  if (!entry) return;
  try {
    await api.clearMask(entry.image_id);
    bench.markCleared(entry.image_id);
    renderCatalog();
    setStatus(`cleared ${entry.image_id}`);
  } catch (err) {
    setStatus(`clear failed: ${err instanceof Error ? err.message : err}`);
  }
}

function wireEvents(): void {
  canvas.addEventListener("click", (ev) => {
    if (ev.shiftKey) return;  // shift reserved for panning
    const rect = canvas.getBoundingClientRect();
    void clickToAnnotate(ev.clientX - rect.left, ev.clientY - rect.top);
  });

  canvas.addEventListener("mousemove", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const { x, y } = screenToImage(view, ev.clientX - rect.left, ev.clientY - rect.top);
    coordEl.textContent = `(${x}, ${y})`;
    if (ev.buttons === 1 && ev.shiftKey) {
      view = pan(view, ev.movementX, ev.movementY);
      render();
    }
  });

  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const rect = canvas.getBoundingClientRect();
    const factor = ev.deltaY < 0 ? 2 : 0.5;
    view = zoomAt(view, clampZoom(view.zoom * factor),
                  ev.clientX - rect.left, ev.clientY - rect.top);
    setStatus(`zoom ${view.zoom}x (${MIN_ZOOM}-${MAX_ZOOM})`);
    render();
  }, { passive: false });

  document.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLInputElement) return;
    if (ev.key === "ArrowRight" || ev.key === "ArrowDown") {
      bench.next();
      void loadCurrent();
    } else if (ev.key === "ArrowLeft" || ev.key === "ArrowUp") {
      bench.prev();
      void loadCurrent();
    } else if (ev.key === "a") {
      void acceptPending();
    } else if (ev.key === "b") {
      blinkBtn.click();
    }
  });

  acceptBtn.addEventListener("click", () => void acceptPending());
  clearBtn.addEventListener("click", () => void clearAccepted());
  exportBtn.addEventListener("click", () => {
    window.location.href = api.exportUrl();
  });

  blinkBtn.addEventListener("click", () => {
    if (blinkTimer !== null) {
      window.clearInterval(blinkTimer);
      blinkTimer = null;
      blinkOn = true;
      blinkBtn.classList.remove("on");
    } else {
      blinkTimer = window.setInterval(() => {
        blinkOn = !blinkOn;
        render();
      }, 400);
      blinkBtn.classList.add("on");
    }
    render();
  });

  opacityEl.addEventListener("input", () => {
    if (bench.pending) rebuildOverlay(bench.pending.response);
    render();
  });

  for (const name of ["alpha", "beta", "delta", "i"] as const) {
    paramInput(name).addEventListener("change", (ev) => {
      const raw = (ev.target as HTMLInputElement).value.trim();
      bench.setOverride(name, raw === "" ? undefined : Number(raw));
    });
  }
}

async function boot(): Promise<void> {
  wireEvents();
  for (;;) {
    if (await api.health()) break;
    setBanner("service unreachable — retrying...");
    await new Promise((resolve) => setTimeout(resolve, 1500));
  }
  setBanner(null);
  try {
    bench.setCatalog(await api.listImages());
  } catch {
    setBanner("could not list images — is the service pointed at a directory?");
    return;
  }
  await loadCurrent();
}

void boot();
