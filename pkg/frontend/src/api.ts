import type {
  AnnotationRecord,
  CameraInfo,
  OverlayResponse,
  RecommendRequestBody,
  RecommendResponse,
  TrajectorySummary,
} from "./types";

export type FetchLike = (
  input: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
  }
) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  arrayBuffer(): Promise<ArrayBuffer>;
}>;

export type MatchOutcome =
  | { kind: "matched"; record: AnnotationRecord }
  | { kind: "conflict"; currentVersion: number; detail: string }
  | { kind: "rejected"; status: number; detail: string };

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

/** Thin typed client over the annotation service; fetch is injectable so
 * tests can script responses. Network failures reject; HTTP statuses the
 * workbench must react to (409) come back as values, not exceptions. */
export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = fetch as unknown as FetchLike,
    private user: string = "annotator"
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    if (!resp.ok) {
      const body = (await resp.json().catch(() => ({}))) as { detail?: string };
      throw new ApiError(resp.status, body.detail ?? "request failed");
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.getJson("/health");
  }

  cameras(): Promise<CameraInfo[]> {
    return this.getJson("/cameras");
  }

  cameraTrajectories(cameraId: string): Promise<TrajectorySummary[]> {
    return this.getJson(`/cameras/${encodeURIComponent(cameraId)}/trajectories`);
  }

  trajectory(uid: string): Promise<TrajectorySummary> {
    return this.getJson(`/trajectories/${encodeURIComponent(uid)}`);
  }

  recommend(body: RecommendRequestBody): Promise<RecommendResponse> {
    return this.postJson("/recommend", body) as Promise<RecommendResponse>;
  }

  overlay(ref: string, fromS?: number, toS?: number): Promise<OverlayResponse> {
    const params = new URLSearchParams();
    if (fromS !== undefined) params.set("from", String(fromS));
    if (toS !== undefined) params.set("to", String(toS));
    const qs = params.size > 0 ? `?${params.toString()}` : "";
    return this.getJson(`/overlay/${encodeURIComponent(ref)}${qs}`);
  }

  annotations(): Promise<AnnotationRecord[]> {
    return this.getJson("/annotations");
  }

  async exportArchive(): Promise<ArrayBuffer> {
    const resp = await this.fetchFn(`${this.baseUrl}/export?format=mtmc`);
    if (!resp.ok) throw new ApiError(resp.status, "export failed");
    return resp.arrayBuffer();
  }

  private async postJson(path: string, body: unknown): Promise<unknown> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json", "X-User": this.user },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      const doc = (await resp.json().catch(() => ({}))) as { detail?: string };
      throw new ApiError(resp.status, doc.detail ?? "request failed");
    }
    return resp.json();
  }

  /** POST /matches; a 409 is a first-class outcome the caller must handle. */
  async submitMatch(
    queryId: string,
    candidateId: string,
    expectedVersion: number
  ): Promise<MatchOutcome> {
    const resp = await this.fetchFn(`${this.baseUrl}/matches`, {
      method: "POST",
      headers: { "Content-Type": "application/json", "X-User": this.user },
      body: JSON.stringify({
        query_id: queryId,
        candidate_id: candidateId,
        expected_version: expectedVersion,
      }),
    });
    if (resp.ok) {
      return { kind: "matched", record: (await resp.json()) as AnnotationRecord };
    }
    const doc = (await resp.json().catch(() => ({}))) as {
      detail?: string;
      current_version?: number;
    };
    if (resp.status === 409) {
      return {
        kind: "conflict",
        currentVersion: doc.current_version ?? -1,
        detail: doc.detail ?? "version conflict",
      };
    }
    return { kind: "rejected", status: resp.status, detail: doc.detail ?? "rejected" };
  }
}
