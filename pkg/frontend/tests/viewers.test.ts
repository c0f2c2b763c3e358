import { describe, expect, it } from "vitest";

import { ClipViewerPool, MAX_VIEWERS } from "../src/viewers";
import type { OverlayPayload } from "../src/types";

const payload: OverlayPayload = { clip_uri: "clips/x.mp4", fps: 10, frames: [] };

describe("clip viewer pool", () => {
  it("holds at most four viewers; the fifth closes the oldest", () => {
    const pool = new ClipViewerPool();
    for (let i = 1; i <= 5; i++) {
      pool.open(`c000:${i}`, `clips/c00${i}.mp4`, payload);
    }
    expect(pool.size).toBe(MAX_VIEWERS);
    expect(pool.has("c000:1")).toBe(false); // oldest evicted
    expect(pool.list().map((v) => v.uid)).toEqual([
      "c000:2",
      "c000:3",
      "c000:4",
      "c000:5",
    ]);
  });

  it("re-opening an existing clip refreshes instead of duplicating", () => {
    const pool = new ClipViewerPool();
    pool.open("c000:1", "clips/a.mp4", payload);
    const updated: OverlayPayload = { ...payload, fps: 25 };
    pool.open("c000:1", "clips/a.mp4", updated);
    expect(pool.size).toBe(1);
    expect(pool.list()[0].payload.fps).toBe(25);
  });

  it("close removes a viewer", () => {
    const pool = new ClipViewerPool();
    pool.open("c000:1", "clips/a.mp4", payload);
    pool.close("c000:1");
    expect(pool.size).toBe(0);
  });
});
