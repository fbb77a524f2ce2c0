/** Typed client for the annotation service; every overlay byte comes from here. */

import type { RleRows } from "./rle.js";

export interface CatalogEntry {
  image_id: string;
  width: number;
  height: number;
  annotated: boolean;
}

export interface RoiRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

export interface MaskWire {
  width: number;
  height: number;
  rle: RleRows;
  png_base64: string;
}

export interface AnnotateResponse {
  mask: MaskWire;
  iterations: number;
  converged: boolean;
  oscillating: boolean;
  c1: number;
  c2: number;
  roi: RoiRect;
}

/** Method constants the drawer may override per click. */
export interface ParamOverrides {
  alpha?: number;
  beta?: number;
  delta?: number;
  i?: number;
}

export class ApiError extends Error {
  status: number;
  roi: RoiRect | null;

  constructor(status: number, message: string, roi: RoiRect | null = null) {
    super(message);
    this.status = status;
    this.roi = roi;
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base: string, fetchFn: FetchLike = fetch) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  imageUrl(imageId: string): string {
    return `${this.base}/images/${encodeURIComponent(imageId)}`;
  }

  maskUrl(imageId: string): string {
    return `${this.imageUrl(imageId)}/mask`;
  }

  exportUrl(): string {
    return `${this.base}/export`;
  }

  async health(): Promise<boolean> {
    try {
      const res = await this.fetchFn(`${this.base}/healthz`);
      return res.ok;
    } catch {
      return false;
    }
  }

  async listImages(): Promise<CatalogEntry[]> {
    const res = await this.fetchFn(`${this.base}/images`);
    if (!res.ok) throw new ApiError(res.status, `catalog request failed (${res.status})`);
    const body = (await res.json()) as { images: CatalogEntry[] };
    return body.images;
  }

  async annotate(
    imageId: string, x: number, y: number, params?: ParamOverrides,
  ): Promise<AnnotateResponse> {
    const payload: Record<string, unknown> = { image_id: imageId, x, y };
    if (params && Object.keys(params).length > 0) payload.params = params;
    const res = await this.fetchFn(`${this.base}/annotate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    const body = await res.json();
    if (!res.ok) {
      throw new ApiError(res.status, body.error ?? `annotate failed (${res.status})`,
                         body.roi ?? null);
    }
    return body as AnnotateResponse;
  }

  async accept(imageId: string, mask: MaskWire): Promise<number> {
    const res = await this.fetchFn(`${this.imageUrl(imageId)}/accept`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ mask: { rle: mask.rle, width: mask.width, height: mask.height } }),
    });
    const body = await res.json();
    if (!res.ok) throw new ApiError(res.status, body.error ?? "accept failed");
    return (body as { revision: number }).revision;
  }

  async clearMask(imageId: string): Promise<number> {
    const res = await this.fetchFn(`${this.imageUrl(imageId)}/clear`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: "{}",
    });
    const body = await res.json();
    if (!res.ok) throw new ApiError(res.status, body.error ?? "clear failed");
    return (body as { revision: number }).revision;
  }
}
