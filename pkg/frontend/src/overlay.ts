import type { OverlayBox, OverlayPayload } from "./types";

/** Structural subset of CanvasRenderingContext2D so drawing logic can be
 * exercised (and snapshot-tested) without a browser canvas. */
export interface Canvas2D {
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
}

export interface OverlayView {
  scaleX: number;
  scaleY: number;
  width: number;
  height: number;
}

export function viewForSize(
  videoWidth: number,
  videoHeight: number,
  canvasWidth: number,
  canvasHeight: number
): OverlayView {
  return {
    scaleX: canvasWidth / videoWidth,
    scaleY: canvasHeight / videoHeight,
    width: canvasWidth,
    height: canvasHeight,
  };
}

/** Frame index the clip shows at playback time t (seconds). */
export function frameAtTime(payload: OverlayPayload, timeS: number): number {
  return Math.floor(timeS * payload.fps);
}

export function boxesAtFrame(payload: OverlayPayload, frame: number): OverlayBox[] {
  const entry = payload.frames.find((f) => f.frame === frame);
  return entry ? entry.boxes : [];
}

export function boxLabel(box: OverlayBox): string {
  return box.global_id !== null ? `#${box.global_id}` : box.trajectory_uid;
}

/** Draw every box of the payload's frame at playback time t onto the canvas
 * sitting above the clip element. Boxes come verbatim from the payload; the
 * only transformation is the canvas/video scale. */
export function drawOverlay(
  ctx: Canvas2D,
  payload: OverlayPayload,
  timeS: number,
  view: OverlayView
): number {
  ctx.clearRect(0, 0, view.width, view.height);
  const boxes = boxesAtFrame(payload, frameAtTime(payload, timeS));
  ctx.lineWidth = 2;
  ctx.font = "13px sans-serif";
  for (const box of boxes) {
    const x = box.x1 * view.scaleX;
    const y = box.y1 * view.scaleY;
    const w = (box.x2 - box.x1) * view.scaleX;
    const h = (box.y2 - box.y1) * view.scaleY;
    ctx.strokeStyle = box.color;
    ctx.strokeRect(x, y, w, h);
    ctx.fillStyle = box.color;
    ctx.fillRect(x, y - 16, 52, 16);
    ctx.fillStyle = "#000";
    ctx.fillText(boxLabel(box), x + 3, y - 4);
  }
  return boxes.length;
}

/** Keep the overlay canvas glued to the video element's displayed size. */
export function syncCanvasToVideo(
  canvas: HTMLCanvasElement,
  video: HTMLVideoElement
): void {
  const width = video.clientWidth || video.videoWidth;
  const height = video.clientHeight || video.videoHeight;
  if (width > 0 && height > 0) {
    if (canvas.width !== width || canvas.height !== height) {
      canvas.width = width;
      canvas.height = height;
    }
  }
}
