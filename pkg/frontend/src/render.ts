import { buildCameraMap, MapNode } from "./map";
import type { Banner, ConflictPrompt, WorkbenchState } from "./workbench";
import type { ClipViewer } from "./viewers";

export interface CandidateListRow {
  uid: string;
  cameraId: string;
  offsetLabel: string;
  appearanceLabel: string;
  globalId: number | null;
  selected: boolean;
}

export interface WorkbenchView {
  queryLabel: string | null;
  map: MapNode[];
  rows: CandidateListRow[];
  emptyListMessage: string | null;
  banner: Banner | null;
  conflict: ConflictPrompt | null;
  viewers: Array<{ uid: string; clipUri: string }>;
  accepted: number;
  remaining: number;
  done: boolean;
}

/** Pure view model for the workbench: candidate rows carry the time offset
 * and appearance distance the annotator scans, the map highlights the query
 * camera, and an explicitly worded empty state replaces a blank list. */
export function renderWorkbench(
  state: WorkbenchState,
  viewers: ClipViewer[],
  mapWidth = 360,
  mapHeight = 240
): WorkbenchView {
  const rows = state.candidates.map((c, i) => ({
    uid: c.uid,
    cameraId: c.camera_id,
    offsetLabel: `${c.d >= 0 ? "+" : ""}${c.d.toFixed(1)}s`,
    appearanceLabel: c.appearance_distance.toFixed(3),
    globalId: c.global_id,
    selected: i === state.selectedIndex,
  }));
  return {
    queryLabel: state.query ? state.query.uid : null,
    map: buildCameraMap(
      state.cameras,
      state.query?.camera_id ?? null,
      mapWidth,
      mapHeight
    ),
    rows,
    emptyListMessage: state.emptyList
      ? "No candidates in this time window - press n for the next query"
      : null,
    banner: state.banner,
    conflict: state.conflict,
    viewers: viewers.map((v) => ({ uid: v.uid, clipUri: v.clipUri })),
    accepted: state.acceptedPairs.length,
    remaining: state.queryQueue.length,
    done: state.done,
  };
}
