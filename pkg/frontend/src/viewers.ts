import type { OverlayPayload } from "./types";

export interface ClipViewer {
  uid: string;
  clipUri: string;
  payload: OverlayPayload;
  openedAt: number;
}

/** The simultaneous-clip panel: at most four viewers; opening a fifth
 * closes the oldest one. */
export const MAX_VIEWERS = 4;

export class ClipViewerPool {
  private viewers: ClipViewer[] = [];
  private counter = 0;

  open(uid: string, clipUri: string, payload: OverlayPayload): ClipViewer {
    const existing = this.viewers.find((v) => v.uid === uid);
    if (existing) {
      existing.payload = payload;
      return existing;
    }
    const viewer: ClipViewer = { uid, clipUri, payload, openedAt: this.counter++ };
    this.viewers.push(viewer);
    if (this.viewers.length > MAX_VIEWERS) {
      this.viewers.sort((a, b) => a.openedAt - b.openedAt);
      this.viewers.shift();
    }
    return viewer;
  }

  close(uid: string): void {
    this.viewers = this.viewers.filter((v) => v.uid !== uid);
  }

  closeAll(): void {
    this.viewers = [];
  }

  has(uid: string): boolean {
    return this.viewers.some((v) => v.uid === uid);
  }

  list(): ClipViewer[] {
    return [...this.viewers].sort((a, b) => a.openedAt - b.openedAt);
  }

  get size(): number {
    return this.viewers.length;
  }
}
