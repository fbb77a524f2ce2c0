/** Workbench session state: catalog position, the pending overlay, and the
 * accept-and-advance loop.  Pure logic, no DOM. */

import type { AnnotateResponse, CatalogEntry, ParamOverrides } from "./api.js";

export interface PendingOverlay {
  imageId: string;
  response: AnnotateResponse;
}

export class Workbench {
  catalog: CatalogEntry[] = [];
  currentIndex = -1;
  pending: PendingOverlay | null = null;
  overrides: ParamOverrides = {};

  setCatalog(entries: CatalogEntry[]): void {
    this.catalog = entries.slice();
    if (this.catalog.length === 0) {
      this.currentIndex = -1;
    } else if (this.currentIndex < 0 || this.currentIndex >= this.catalog.length) {
      this.currentIndex = 0;
    }
    this.pending = null;
  }

  get current(): CatalogEntry | null {
    return this.currentIndex >= 0 ? this.catalog[this.currentIndex] ?? null : null;
  }

  select(index: number): CatalogEntry | null {
    if (index < 0 || index >= this.catalog.length) return this.current;
    if (index !== this.currentIndex) {
      this.currentIndex = index;
      this.pending = null;  // an overlay belongs to one image only
    }
    return this.current;
  }

  selectId(imageId: string): CatalogEntry | null {
    const idx = this.catalog.findIndex((e) => e.image_id === imageId);
    return idx >= 0 ? this.select(idx) : this.current;
  }

  next(): CatalogEntry | null {
    return this.select(Math.min(this.currentIndex + 1, this.catalog.length - 1));
  }

  prev(): CatalogEntry | null {
    return this.select(Math.max(this.currentIndex - 1, 0));
  }

  /** Register a fresh annotation result; re-clicks simply replace it. */
  setPending(response: AnnotateResponse): void {
    const cur = this.current;
    if (!cur) throw new Error("no image selected");
    if (response.mask.width !== cur.width || response.mask.height !== cur.height) {
      throw new Error("overlay dimensions do not match the current image");
    }
    this.pending = { imageId: cur.image_id, response };
  }

  clearPending(): void {
    this.pending = null;
  }

  get canAccept(): boolean {
    return this.pending !== null && this.current !== null
      && this.pending.imageId === this.current.image_id;
  }

  /** After a successful accept: flag the image and move to the next
   * unannotated one (wrapping), staying put when none is left. */
  markAcceptedAndAdvance(): CatalogEntry | null {
    const cur = this.current;
    if (!cur) return null;
    cur.annotated = true;
    this.pending = null;
    const n = this.catalog.length;
    for (let step = 1; step <= n; step++) {
      const idx = (this.currentIndex + step) % n;
      if (!this.catalog[idx].annotated) {
        this.currentIndex = idx;
        return this.current;
      }
    }
    return this.current;
  }

  markCleared(imageId: string): void {
    const entry = this.catalog.find((e) => e.image_id === imageId);
    if (entry) entry.annotated = false;
  }

  setOverride(key: keyof ParamOverrides, value: number | undefined): void {
    if (value === undefined || Number.isNaN(value)) {
      delete this.overrides[key];
    } else {
      this.overrides[key] = value;
    }
  }

  /** Only explicitly set, finite overrides travel with a click. */
  overridesPayload(): ParamOverrides | undefined {
    const entries = Object.entries(this.overrides)
      .filter(([, v]) => typeof v === "number" && Number.isFinite(v));
    return entries.length ? Object.fromEntries(entries) : undefined;
  }
}
