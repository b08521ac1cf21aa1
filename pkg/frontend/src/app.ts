/**
 * DOM wiring for the gamma studio: view browser, gamma/tau sliders,
 * object picker, overlay viewport, removal. Stateless beyond the current
 * selections; every artifact shown comes from the service.
 */

import { ApiClient, AssignController, type AssignResult, type SceneInfo } from "./api.js";
import { buildOverlay } from "./overlay.js";
import type { LabelImage } from "./png16.js";
import { rateLimit } from "./throttle.js";

export const ASSIGN_THROTTLE_MS = 100;
const DEFAULT_TAU = 0.1;

interface UiState {
  scene: SceneInfo | null;
  viewId: number | null;
  gamma: number;
  tau: number;
  mode: "binary" | "scene";
  token: string | null;
  memberCounts: number[];
  selected: Set<number>;
  maskSequence: number;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function mountApp(root: HTMLElement, serviceUrl: string): void {
  const client = new ApiClient(serviceUrl.replace(/\/$/, ""));
  const state: UiState = {
    scene: null,
    viewId: null,
    gamma: 0.0,
    tau: DEFAULT_TAU,
    mode: "binary",
    token: null,
    memberCounts: [],
    selected: new Set(),
    maskSequence: 0,
  };

  root.innerHTML = "";
  const errorBar = el("div", "error-bar");
  errorBar.hidden = true;
  const sidebar = el("div", "sidebar");
  const viewport = el("div", "viewport");
  const thumbs = el("div", "thumbs");
  const layout = el("div", "layout");
  layout.append(sidebar, viewport);
  root.append(errorBar, layout, thumbs);

  function showError(context: string, error: unknown): void {
    errorBar.hidden = false;
    errorBar.textContent = `${context}: ${String(error)}`;
  }

  function clearError(): void {
    errorBar.hidden = true;
    errorBar.textContent = "";
  }

  // --- viewport: preview image under an overlay canvas -------------------
  const stack = el("div", "stack");
  const previewImg = el("img", "preview");
  previewImg.alt = "view preview";
  const overlayCanvas = el("canvas", "overlay");
  stack.append(previewImg, overlayCanvas);
  viewport.append(stack);

  // --- controls -----------------------------------------------------------
  const gammaLabel = el("label", "control-label", "background bias γ: 0.00");
  const gammaSlider = el("input");
  gammaSlider.type = "range";
  gammaSlider.min = "-1";
  gammaSlider.max = "1";
  gammaSlider.step = "0.01";
  gammaSlider.value = "0";

  const modeSelect = el("select");
  for (const mode of ["binary", "scene"]) {
    const option = el("option", undefined, mode);
    option.value = mode;
    modeSelect.append(option);
  }

  const tauLabel = el("label", "control-label",
                      `quantization τ: ${DEFAULT_TAU.toFixed(2)}`);
  const tauSlider = el("input");
  tauSlider.type = "range";
  tauSlider.min = "0.01";
  tauSlider.max = "0.99";
  tauSlider.step = "0.01";
  tauSlider.value = String(DEFAULT_TAU);

  const opacityLabel = el("label", "control-label", "overlay opacity: 0.60");
  const opacitySlider = el("input");
  opacitySlider.type = "range";
  opacitySlider.min = "0";
  opacitySlider.max = "1";
  opacitySlider.step = "0.05";
  opacitySlider.value = "0.6";
  overlayCanvas.style.opacity = "0.6";

  const counts = el("div", "counts", "no assignment yet");
  const picker = el("div", "picker");
  const removeButton = el("button", "remove", "remove selected objects");
  removeButton.disabled = true;
  const removeStatus = el("div", "remove-status");

  sidebar.append(
    gammaLabel, gammaSlider, el("label", "control-label", "mode"), modeSelect,
    tauLabel, tauSlider, opacityLabel, opacitySlider,
    counts, picker, removeButton, removeStatus,
  );

  // --- overlay refresh (stale mask responses dropped by sequence) --------
  async function refreshOverlay(): Promise<void> {
    if (state.token === null || state.viewId === null) {
      overlayCanvas.getContext("2d")
        ?.clearRect(0, 0, overlayCanvas.width, overlayCanvas.height);
      return;
    }
    const sequence = ++state.maskSequence;
    try {
      const image = await client.fetchMask(state.viewId, state.token, state.tau);
      if (sequence !== state.maskSequence) return;
      drawOverlay(image);
      clearError();
    } catch (error) {
      if (sequence === state.maskSequence) showError("GET /mask", error);
    }
  }

  function drawOverlay(image: LabelImage): void {
    const selected = state.mode === "scene" && state.selected.size > 0
      ? state.selected : undefined;
    const overlay = buildOverlay(image, selected);
    overlayCanvas.width = overlay.width;
    overlayCanvas.height = overlay.height;
    const ctx = overlayCanvas.getContext("2d");
    if (!ctx) return;
    ctx.putImageData(
      new ImageData(overlay.rgba, overlay.width, overlay.height), 0, 0);
    overlayCanvas.dataset.pixelCount = String(overlay.pixelCount);
  }

  // --- assignment plumbing -------------------------------------------------
  const controller = new AssignController(
    client,
    (result: AssignResult) => {
      state.token = result.token;
      state.memberCounts = result.member_counts;
      renderCounts();
      renderPicker();
      clearError();
      void refreshOverlay();
    },
    (error) => showError("POST /assign", error),
  );
  const throttledAssign = rateLimit(
    (gamma: number, mode: "binary" | "scene") =>
      controller.request(gamma, mode),
    ASSIGN_THROTTLE_MS,
  );

  function renderCounts(): void {
    counts.textContent = state.memberCounts
      .map((n, objectId) => `object ${objectId}: ${n}`)
      .join("  ");
  }

  function renderPicker(): void {
    picker.innerHTML = "";
    if (state.mode !== "scene") {
      removeButton.disabled = true;
      return;
    }
    for (let objectId = 1; objectId < state.memberCounts.length; objectId++) {
      const row = el("label", "picker-row");
      const box = el("input");
      box.type = "checkbox";
      box.checked = state.selected.has(objectId);
      box.addEventListener("change", () => {
        if (box.checked) state.selected.add(objectId);
        else state.selected.delete(objectId);
        removeButton.disabled = state.selected.size === 0;
        void refreshOverlay();
      });
      row.append(box, el("span", undefined,
                         ` object ${objectId} (${state.memberCounts[objectId]})`));
      picker.append(row);
    }
    removeButton.disabled = state.selected.size === 0;
  }

  gammaSlider.addEventListener("input", () => {
    state.gamma = Number(gammaSlider.value);
    gammaLabel.textContent = `background bias γ: ${state.gamma.toFixed(2)}`;
    throttledAssign(state.gamma, state.mode);
  });
  modeSelect.addEventListener("change", () => {
    state.mode = modeSelect.value as "binary" | "scene";
    state.selected.clear();
    throttledAssign(state.gamma, state.mode);
  });
  tauSlider.addEventListener("input", () => {
    state.tau = Number(tauSlider.value);
    tauLabel.textContent = `quantization τ: ${state.tau.toFixed(2)}`;
    void refreshOverlay();
  });
  opacitySlider.addEventListener("input", () => {
    overlayCanvas.style.opacity = opacitySlider.value;
    opacityLabel.textContent =
      `overlay opacity: ${Number(opacitySlider.value).toFixed(2)}`;
  });
  removeButton.addEventListener("click", () => {
    if (state.token === null || state.selected.size === 0) return;
    removeButton.disabled = true;
    client.postRemove([...state.selected].sort((a, b) => a - b), state.token)
      .then((result) => {
        removeStatus.textContent =
          `removed ${result.removed} gaussians -> ${result.path}`;
        clearError();
      })
      .catch((error) => showError("POST /remove", error))
      .finally(() => { removeButton.disabled = state.selected.size === 0; });
  });

  // --- view browser ---------------------------------------------------------
  function selectView(viewId: number): void {
    state.viewId = viewId;
    previewImg.src = client.previewUrl(viewId);
    for (const node of thumbs.children) {
      (node as HTMLElement).classList.toggle(
        "active", Number((node as HTMLElement).dataset.viewId) === viewId);
    }
    void refreshOverlay();
  }

  client.getScene()
    .then((scene) => {
      state.scene = scene;
      for (const view of scene.views) {
        const thumb = el("img", "thumb") as HTMLImageElement;
        thumb.src = client.previewUrl(view.view_id);
        thumb.title = `view ${view.view_id}`;
        thumb.dataset.viewId = String(view.view_id);
        thumb.addEventListener("click", () => selectView(view.view_id));
        thumbs.append(thumb);
      }
      if (scene.views.length > 0) selectView(scene.views[0].view_id);
      throttledAssign(state.gamma, state.mode);
    })
    .catch((error) => showError("GET /scene", error));
}
