/**
 * Integration against a live splatlift service: slider-sweep request
 * budget, monotone member counts, and the overlay == PNG pixel-count
 * invariant.  Spawns the Python service on a synthetic fixture; set
 * SKIP_E2E=1 to run the unit tests alone.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, AssignController, type AssignResult } from "../src/api.js";
import { buildOverlay, nonzeroCount } from "../src/overlay.js";
import { rateLimit } from "../src/throttle.js";

const PORT = 8791;
const BASE = `http://127.0.0.1:${PORT}`;
const PYTHON = process.env.PYTHON ?? "python3";
const enabled = process.env.SKIP_E2E !== "1";

let workDir = "";
let server: ChildProcess | null = null;

function runCli(args: string[]): void {
  const result = spawnSync(PYTHON, ["-m", "splatlift.cli", ...args],
                           { encoding: "utf-8" });
  if (result.status !== 0) {
    throw new Error(
      `splatlift ${args[0]} failed: ${result.stderr || result.stdout}`);
  }
}

async function waitForServer(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/scene`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("service did not come up in time");
}

describe.skipIf(!enabled)("gamma studio against a live service", () => {
  beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), "gamma-studio-e2e-"));
    runCli(["synth", "--seed", "3", "--gaussians", "300", "--views", "6",
            "--width", "48", "--height", "48", "--mask-views", "3",
            "--preset", "two-cluster", "--out", workDir]);
    runCli(["accumulate", join(workDir, "scene.ply"),
            join(workDir, "cameras.json"), join(workDir, "masks"),
            "--num-objects", "2", "--out", join(workDir, "A.bin")]);
    server = spawn(PYTHON, [
      "-m", "splatlift.cli", "serve", join(workDir, "scene.ply"),
      join(workDir, "cameras.json"), "--matrix", join(workDir, "A.bin"),
      "--output-dir", workDir, "--port", String(PORT),
    ], { stdio: "ignore" });
    await waitForServer(30_000);
  }, 60_000);

  afterAll(() => {
    server?.kill();
    if (workDir) rmSync(workDir, { recursive: true, force: true });
  });

  it("slider sweep: <= 25 assign calls, member counts non-increasing", async () => {
    const client = new ApiClient(BASE);
    const received: AssignResult[] = [];
    const controller = new AssignController(client, (r) => received.push(r));
    const throttled = rateLimit(
      (gamma: number) => controller.request(gamma, "binary"), 100);

    // 201 slider events over ~2 s, like a real scrub from -1 to +1.
    for (let i = 0; i <= 200; i++) {
      throttled(-1 + i * 0.01);
      await new Promise((r) => setTimeout(r, 10));
    }
    throttled.flush();
    await new Promise((r) => setTimeout(r, 500));

    expect(controller.requestCount).toBeGreaterThanOrEqual(2);
    expect(controller.requestCount).toBeLessThanOrEqual(25);
    expect(received.length).toBeGreaterThanOrEqual(2);
    // gamma ascended during the sweep, so foreground counts may only fall
    const foreground = received.map((r) => r.member_counts[1]);
    for (let i = 1; i < foreground.length; i++) {
      expect(foreground[i]).toBeLessThanOrEqual(foreground[i - 1]);
    }
    // the final applied state is the final slider position
    expect(received[received.length - 1].gamma).toBeCloseTo(1.0, 10);
  }, 30_000);

  it("overlay pixel count equals PNG nonzero count exactly", async () => {
    const client = new ApiClient(BASE);
    const scene = await client.getScene();
    const assign = await client.postAssign(0.0, "binary");
    expect(assign.member_counts[1]).toBeGreaterThan(0);
    for (const view of scene.views.slice(0, 3)) {
      const mask = await client.fetchMask(view.view_id, assign.token, 0.1);
      expect(mask.width).toBe(view.width);
      expect(mask.height).toBe(view.height);
      const overlay = buildOverlay(mask);
      expect(overlay.pixelCount).toBe(nonzeroCount(mask));
      expect(overlay.pixelCount).toBeGreaterThan(0);
    }
  }, 30_000);

  it("scene-mode selection paints only the picked object", async () => {
    const client = new ApiClient(BASE);
    const scene = await client.getScene();
    const assign = await client.postAssign(0.0, "scene");
    const view = scene.views[0];
    const mask = await client.fetchMask(view.view_id, assign.token, 0.1);
    const all = buildOverlay(mask);
    const only1 = buildOverlay(mask, new Set([1]));
    const none = buildOverlay(mask, new Set<number>());
    let label1 = 0;
    for (const v of mask.labels) if (v === 1) label1++;
    expect(only1.pixelCount).toBe(label1);
    expect(none.pixelCount).toBe(0);
    expect(all.pixelCount).toBe(nonzeroCount(mask));
  }, 30_000);

  it("raising tau never adds overlay pixels", async () => {
    const client = new ApiClient(BASE);
    const scene = await client.getScene();
    const assign = await client.postAssign(0.0, "binary");
    const view = scene.views[0];
    let previous = Number.POSITIVE_INFINITY;
    for (const tau of [0.05, 0.2, 0.5, 0.8]) {
      const mask = await client.fetchMask(view.view_id, assign.token, tau);
      const count = buildOverlay(mask).pixelCount;
      expect(count).toBeLessThanOrEqual(previous);
      previous = count;
    }
  }, 30_000);
});
