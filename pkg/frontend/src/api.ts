/**
 * Typed client for the splatlift service. The UI computes nothing
 * segmentation-related on its own; every displayed artifact is fetched.
 */

import { decodeGrayPng, type LabelImage } from "./png16.js";

export interface SceneInfo {
  num_gaussians: number;
  num_objects: number | null;
  views: Array<{ view_id: number; width: number; height: number }>;
}

export interface AssignResult {
  token: string;
  mode: "binary" | "scene";
  gamma: number;
  member_counts: number[];
}

export interface RemoveResult {
  path: string;
  kept: number;
  removed: number;
}

export class ServiceError extends Error {
  constructor(readonly request: string, readonly status: number,
              detail: string) {
    super(`${request} -> ${status}: ${detail}`);
  }
}

async function checked<T>(request: string, response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.error === "string") detail = body.error;
    } catch {
      // keep statusText
    }
    throw new ServiceError(request, response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  async getScene(): Promise<SceneInfo> {
    const response = await fetch(`${this.baseUrl}/scene`);
    return checked("GET /scene", response);
  }

  async postAssign(gamma: number, mode: "binary" | "scene"):
      Promise<AssignResult> {
    const response = await fetch(`${this.baseUrl}/assign`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ gamma, mode }),
    });
    return checked("POST /assign", response);
  }

  async fetchMask(viewId: number, token: string, tau: number):
      Promise<LabelImage> {
    const request = `GET /mask?view=${viewId}`;
    const response = await fetch(
      `${this.baseUrl}/mask?view=${viewId}&token=${token}&tau=${tau}`);
    if (!response.ok) {
      await checked(request, response);
    }
    return decodeGrayPng(await response.arrayBuffer());
  }

  previewUrl(viewId: number): string {
    return `${this.baseUrl}/preview?view=${viewId}`;
  }

  async postRemove(objectIds: number[], token: string): Promise<RemoveResult> {
    const response = await fetch(`${this.baseUrl}/remove`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ object_ids: objectIds, token }),
    });
    return checked("POST /remove", response);
  }
}

/**
 * Serializer for /assign: at most one request in flight (newer slider
 * positions coalesce into a single queued request), and a response is
 * applied only when no newer request has been issued since — out-of-order
 * arrivals are discarded by comparing against the latest issue.
 */
export class AssignController {
  private inFlight = false;
  private queued: { gamma: number; mode: "binary" | "scene" } | null = null;
  private issueSeq = 0;
  requestCount = 0;
  /** Token of the most recently applied assignment. */
  appliedToken: string | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly onResult: (result: AssignResult) => void,
    private readonly onError: (error: unknown) => void = () => {},
  ) {}

  request(gamma: number, mode: "binary" | "scene"): void {
    if (this.inFlight) {
      this.queued = { gamma, mode };
      return;
    }
    void this.issue(gamma, mode);
  }

  private async issue(gamma: number, mode: "binary" | "scene"): Promise<void> {
    this.inFlight = true;
    this.requestCount++;
    const seq = ++this.issueSeq;
    try {
      const result = await this.client.postAssign(gamma, mode);
      if (seq === this.issueSeq && result.token !== this.appliedToken) {
        this.appliedToken = result.token;
        this.onResult(result);
      } else if (seq === this.issueSeq) {
        this.appliedToken = result.token;
      }
    } catch (error) {
      if (seq === this.issueSeq) this.onError(error);
    } finally {
      this.inFlight = false;
      if (this.queued !== null) {
        const next = this.queued;
        this.queued = null;
        void this.issue(next.gamma, next.mode);
      }
    }
  }
}
