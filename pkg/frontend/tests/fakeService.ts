// In-memory stand-in for the annotation service, mimicking its matching,
// versioning and recommendation-exclusion semantics.

import type { MatchOutcome } from "../src/api";
import type { WorkbenchApi } from "../src/workbench";
import type {
  AnnotationRecord,
  CameraInfo,
  OverlayResponse,
  RecommendRequestBody,
  RecommendResponse,
  TrajectorySummary,
} from "../src/types";

interface FakeIdentity {
  global_id: number;
  members: Set<string>;
  version: number;
}

export class FakeService implements WorkbenchApi {
  cams: CameraInfo[] = [];
  trajectories = new Map<string, TrajectorySummary>();
  vehicleOf = new Map<string, number>();
  identities = new Map<number, FakeIdentity>();
  assignment = new Map<string, number>();
  private nextGid = 1;
  failNextSubmit: "conflict" | "network" | null = null;
  submitCalls = 0;

  constructor(nVehicles: number, cameraIds = ["c000", "c001", "c002"]) {
    cameraIds.forEach((cid, ci) => {
      this.cams.push({
        camera_id: cid,
        clip_uri: `clips/${cid}.mp4`,
        frame_count: 600,
        width: 1280,
        height: 960,
        fps: 10,
        position: [200 * ci, 0],
        zone_id: `z${ci}`,
      });
      for (let v = 1; v <= nVehicles; v++) {
        const uid = `${cid}:${v}`;
        const st = 10 * ci + v * 3;
        this.trajectories.set(uid, {
          uid,
          trajectory_id: v,
          camera_id: cid,
          clip_uri: `clips/${cid}.mp4`,
          st,
          et: st + 5,
          fps: 10,
          n_frames: 50,
          global_id: null,
          version: 0,
        });
        this.vehicleOf.set(uid, v);
      }
    });
  }

  private summary(uid: string): TrajectorySummary {
    const base = this.trajectories.get(uid);
    if (!base) throw new Error(`404 ${uid}`);
    const gid = this.assignment.get(uid) ?? null;
    const version = gid !== null ? this.identities.get(gid)!.version : 0;
    return { ...base, global_id: gid, version };
  }

  async cameras(): Promise<CameraInfo[]> {
    return this.cams;
  }

  async cameraTrajectories(cameraId: string): Promise<TrajectorySummary[]> {
    return [...this.trajectories.keys()]
      .filter((uid) => uid.startsWith(`${cameraId}:`))
      .map((uid) => this.summary(uid));
  }

  async trajectory(uid: string): Promise<TrajectorySummary> {
    return this.summary(uid);
  }

  async recommend(body: RecommendRequestBody): Promise<RecommendResponse> {
    const query = this.summary(body.trajectory_id);
    const queryGid = this.assignment.get(query.uid);
    const rows = [];
    for (const uid of this.trajectories.keys()) {
      const cand = this.summary(uid);
      if (cand.camera_id === query.camera_id) continue;
      const d = cand.st - query.st;
      if (d < body.window.min || d > body.window.max) continue;
      if (queryGid !== undefined && this.assignment.get(uid) === queryGid) continue;
      const sameVehicle = this.vehicleOf.get(uid) === this.vehicleOf.get(query.uid);
      rows.push({ ...cand, d, appearance_distance: sameVehicle ? 0.01 : 0.97 });
    }
    rows.sort(
      (a, b) =>
        0.3 * (Math.abs(a.d) - Math.abs(b.d)) / 30 +
        0.7 * (a.appearance_distance - b.appearance_distance)
    );
    return { query, candidates: rows };
  }

  async overlay(ref: string): Promise<OverlayResponse> {
    const record = this.summary(ref);
    return {
      payloads: [
        {
          clip_uri: record.clip_uri,
          fps: record.fps,
          frames: [
            {
              frame: Math.round(record.st * record.fps),
              boxes: [
                {
                  x1: 10,
                  y1: 10,
                  x2: 60,
                  y2: 50,
                  global_id: record.global_id,
                  color: "#00ff88",
                  trajectory_uid: ref,
                },
              ],
            },
          ],
        },
      ],
    };
  }

  async submitMatch(
    queryId: string,
    candidateId: string,
    expectedVersion: number
  ): Promise<MatchOutcome> {
    this.submitCalls += 1;
    if (this.failNextSubmit === "network") {
      this.failNextSubmit = null;
      throw new Error("socket hang up");
    }
    const currentGid = this.assignment.get(queryId);
    const current = currentGid !== undefined ? this.identities.get(currentGid)!.version : 0;
    if (this.failNextSubmit === "conflict") {
      this.failNextSubmit = null;
      return { kind: "conflict", currentVersion: current + 7, detail: "forced" };
    }
    if (expectedVersion !== current) {
      return { kind: "conflict", currentVersion: current, detail: "stale version" };
    }

    const gidQ = this.assignment.get(queryId);
    const gidC = this.assignment.get(candidateId);
    let identity: FakeIdentity;
    if (gidQ === undefined && gidC === undefined) {
      identity = { global_id: this.nextGid++, members: new Set([queryId, candidateId]), version: 1 };
      this.identities.set(identity.global_id, identity);
    } else if (gidQ !== undefined && gidC !== undefined) {
      if (gidQ === gidC) {
        identity = this.identities.get(gidQ)!;
      } else {
        const [keep, drop] = gidQ < gidC ? [gidQ, gidC] : [gidC, gidQ];
        identity = this.identities.get(keep)!;
        const dropped = this.identities.get(drop)!;
        identity.version = Math.max(identity.version, dropped.version) + 1;
        dropped.members.forEach((m) => identity.members.add(m));
        this.identities.delete(drop);
      }
    } else {
      const gid = (gidQ ?? gidC)!;
      identity = this.identities.get(gid)!;
      identity.members.add(gidQ === undefined ? queryId : candidateId);
      identity.version += 1;
    }
    identity.members.forEach((m) => this.assignment.set(m, identity.global_id));
    const record: AnnotationRecord = {
      global_id: identity.global_id,
      members: [...identity.members].sort(),
      version: identity.version,
    };
    return { kind: "matched", record };
  }

  partition(): Set<string> {
    return new Set(
      [...this.identities.values()].map((i) => [...i.members].sort().join("+"))
    );
  }
}
