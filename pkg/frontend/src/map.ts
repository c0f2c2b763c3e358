import type { CameraInfo } from "./types";

export interface MapNode {
  cameraId: string;
  x: number;
  y: number;
  highlighted: boolean;
  zoneId: string | null;
}

/** Camera-location panel view model: positions normalized into a viewport
 * with padding, the query camera flagged for highlighting. Cameras without
 * a position land in a row along the bottom edge. */
export function buildCameraMap(
  cameras: CameraInfo[],
  queryCameraId: string | null,
  width: number,
  height: number,
  padding = 24
): MapNode[] {
  const placed = cameras.filter((c) => c.position !== null);
  const xs = placed.map((c) => c.position![0]);
  const ys = placed.map((c) => c.position![1]);
  const minX = Math.min(...xs, 0);
  const maxX = Math.max(...xs, 1);
  const minY = Math.min(...ys, 0);
  const maxY = Math.max(...ys, 1);
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;

  const nodes: MapNode[] = placed.map((c) => ({
    cameraId: c.camera_id,
    x: padding + ((c.position![0] - minX) / spanX) * (width - 2 * padding),
    y: padding + ((c.position![1] - minY) / spanY) * (height - 2 * padding),
    highlighted: c.camera_id === queryCameraId,
    zoneId: c.zone_id,
  }));

  const unplaced = cameras.filter((c) => c.position === null);
  unplaced.forEach((c, i) => {
    nodes.push({
      cameraId: c.camera_id,
      x: padding + i * 40,
      y: height - padding,
      highlighted: c.camera_id === queryCameraId,
      zoneId: c.zone_id,
    });
  });
  return nodes;
}
