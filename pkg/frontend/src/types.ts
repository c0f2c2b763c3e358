// Wire types mirroring the annotation service JSON.

export interface CameraInfo {
  camera_id: string;
  clip_uri: string;
  frame_count: number;
  width: number;
  height: number;
  fps: number;
  position: [number, number] | null;
  zone_id: string | null;
}

export interface TrajectorySummary {
  uid: string;
  trajectory_id: number;
  camera_id: string;
  clip_uri: string;
  st: number;
  et: number;
  fps: number;
  n_frames: number;
  global_id: number | null;
  version: number;
}

export interface CandidateRow extends TrajectorySummary {
  d: number;
  appearance_distance: number;
}

export interface RecommendResponse {
  query: TrajectorySummary;
  candidates: CandidateRow[];
}

export interface AnnotationRecord {
  global_id: number;
  members: string[];
  version: number;
}

export interface OverlayBox {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  global_id: number | null;
  color: string;
  trajectory_uid: string;
}

export interface OverlayFrame {
  frame: number;
  boxes: OverlayBox[];
}

export interface OverlayPayload {
  clip_uri: string;
  fps: number;
  frames: OverlayFrame[];
}

export interface OverlayResponse {
  payloads: OverlayPayload[];
}

export interface RecommendRequestBody {
  trajectory_id: string;
  window: { min: number; max: number };
  mode: string;
  hops: number;
}
