import type { MatchOutcome } from "./api";
import { ClipViewerPool } from "./viewers";
import type {
  CameraInfo,
  CandidateRow,
  OverlayResponse,
  RecommendRequestBody,
  RecommendResponse,
  TrajectorySummary,
} from "./types";

/** The service surface the workbench needs; ApiClient satisfies it. */
export interface WorkbenchApi {
  cameras(): Promise<CameraInfo[]>;
  cameraTrajectories(cameraId: string): Promise<TrajectorySummary[]>;
  trajectory(uid: string): Promise<TrajectorySummary>;
  recommend(body: RecommendRequestBody): Promise<RecommendResponse>;
  overlay(ref: string): Promise<OverlayResponse>;
  submitMatch(
    queryId: string,
    candidateId: string,
    expectedVersion: number
  ): Promise<MatchOutcome>;
}

export interface WorkbenchConfig {
  windowMin: number;
  windowMax: number;
  mode: string;
  hops: number;
}

export const DEFAULT_CONFIG: WorkbenchConfig = {
  windowMin: 0,
  windowMax: 30,
  mode: "blend",
  hops: 1,
};

export interface Banner {
  kind: "error" | "info";
  text: string;
  canRetry: boolean;
}

export interface ConflictPrompt {
  queryUid: string;
  candidateUid: string;
  currentVersion: number;
  detail: string;
}

export interface WorkbenchState {
  cameras: CameraInfo[];
  queryQueue: string[];
  query: TrajectorySummary | null;
  candidates: CandidateRow[];
  selectedIndex: number;
  emptyList: boolean;
  versionTokens: Map<string, number>;
  banner: Banner | null;
  conflict: ConflictPrompt | null;
  acceptedPairs: Array<[string, string]>;
  done: boolean;
}

/**
 * Drives one annotator's matching session.
 *
 * Annotation state is never mutated locally before the service acknowledges
 * a write: a match only lands in acceptedPairs (and the version tokens only
 * move) after a 200, a 409 refetches the newer state and raises the conflict
 * prompt, and a network failure leaves everything untouched behind a
 * retry-able banner.
 */
export class WorkbenchController {
  readonly viewers = new ClipViewerPool();
  readonly state: WorkbenchState = {
    cameras: [],
    queryQueue: [],
    query: null,
    candidates: [],
    selectedIndex: 0,
    emptyList: false,
    versionTokens: new Map(),
    banner: null,
    conflict: null,
    acceptedPairs: [],
    done: false,
  };

  constructor(
    private api: WorkbenchApi,
    private config: WorkbenchConfig = DEFAULT_CONFIG
  ) {}

  /** Load cameras and enqueue every trajectory, camera by camera. */
  async start(): Promise<void> {
    this.state.cameras = await this.api.cameras();
    const queue: string[] = [];
    for (const cam of this.state.cameras) {
      const summaries = await this.api.cameraTrajectories(cam.camera_id);
      summaries.sort((a, b) => a.st - b.st);
      queue.push(...summaries.map((s) => s.uid));
    }
    this.state.queryQueue = queue;
    await this.nextQuery();
  }

  async setQuery(uid: string): Promise<void> {
    try {
      const summary = await this.api.trajectory(uid);
      this.state.query = summary;
      this.state.versionTokens.set(uid, summary.version);
      const resp = await this.api.recommend({
        trajectory_id: uid,
        window: { min: this.config.windowMin, max: this.config.windowMax },
        mode: this.config.mode,
        hops: this.config.hops,
      });
      this.state.candidates = resp.candidates;
      this.state.selectedIndex = 0;
      this.state.emptyList = resp.candidates.length === 0;
      this.state.banner = null;
    } catch (err) {
      this.state.banner = {
        kind: "error",
        text: `failed to load query ${uid}: ${String(err)}`,
        canRetry: true,
      };
    }
  }

  async nextQuery(): Promise<void> {
    const next = this.state.queryQueue.shift();
    if (next === undefined) {
      this.state.query = null;
      this.state.candidates = [];
      this.state.emptyList = false;
      this.state.done = true;
      return;
    }
    await this.setQuery(next);
  }

  selectedCandidate(): CandidateRow | null {
    return this.state.candidates[this.state.selectedIndex] ?? null;
  }

  selectNext(): void {
    if (this.state.selectedIndex < this.state.candidates.length - 1) {
      this.state.selectedIndex += 1;
    }
  }

  selectPrev(): void {
    if (this.state.selectedIndex > 0) this.state.selectedIndex -= 1;
  }

  /** Open the selected candidate's clip (plus overlay boxes) in the viewer
   * panel; a fifth open clip closes the oldest. */
  async openSelectedClip(): Promise<void> {
    const candidate = this.selectedCandidate();
    if (!candidate) return;
    try {
      const overlay = await this.api.overlay(candidate.uid);
      const payload = overlay.payloads[0];
      if (payload) this.viewers.open(candidate.uid, payload.clip_uri, payload);
    } catch (err) {
      this.state.banner = {
        kind: "error",
        text: `failed to load clip for ${candidate.uid}: ${String(err)}`,
        canRetry: false,
      };
    }
  }

  /** Submit the selected match with the query's version token. */
  async acceptSelected(): Promise<void> {
    const query = this.state.query;
    const candidate = this.selectedCandidate();
    if (!query || !candidate) return;
    const expected = this.state.versionTokens.get(query.uid) ?? 0;

    let outcome;
    try {
      outcome = await this.api.submitMatch(query.uid, candidate.uid, expected);
    } catch (err) {
      // Network failure: nothing was acknowledged, mutate nothing.
      this.state.banner = {
        kind: "error",
        text: `match not submitted: ${String(err)}`,
        canRetry: true,
      };
      return;
    }

    if (outcome.kind === "matched") {
      for (const member of outcome.record.members) {
        this.state.versionTokens.set(member, outcome.record.version);
      }
      this.state.acceptedPairs.push([query.uid, candidate.uid]);
      this.state.conflict = null;
      await this.nextQuery();
      return;
    }

    if (outcome.kind === "conflict") {
      this.state.conflict = {
        queryUid: query.uid,
        candidateUid: candidate.uid,
        currentVersion: outcome.currentVersion,
        detail: outcome.detail,
      };
      // Refetch so the prompt shows the newer state; tokens move to the
      // server's truth but the pair stays unmatched locally.
      await this.setQuery(query.uid);
      return;
    }

    this.state.banner = {
      kind: "error",
      text: `match rejected (${outcome.status}): ${outcome.detail}`,
      canRetry: false,
    };
  }

  dismissConflict(): void {
    this.state.conflict = null;
  }

  /** Keyboard-only operation: a=accept, n=next query, j/k=move selection,
   * o=open clip. */
  async handleKey(key: string): Promise<void> {
    switch (key) {
      case "a":
        await this.acceptSelected();
        break;
      case "n":
        await this.nextQuery();
        break;
      case "j":
        this.selectNext();
        break;
      case "k":
        this.selectPrev();
        break;
      case "o":
        await this.openSelectedClip();
        break;
      default:
        break;
    }
  }
}
