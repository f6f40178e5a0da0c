/**
 * Typed client for the phaseforge HTTP API.
 *
 * The inspector does no label math of its own: every phase id, segment
 * range, and statistic displayed in the UI comes from these payloads.
 */

export interface Phase {
  id: number;
  name: string;
  kind: string;
}

export interface Taxonomy {
  surgery_kind: string;
  phases: Phase[];
}

export interface RleSegment {
  start_frame: number;
  end_frame: number;
  label: number | null;
}

export interface TrackRle {
  annotator_id: string;
  frame_count: number;
  provenance: string;
  segments: RleSegment[];
}

export interface TracksResponse {
  tracks: TrackRle[];
  draft?: TrackRle;
}

export interface CandidateRun {
  start_frame: number;
  end_frame: number;
  label: number;
  length: number;
}

export interface BlankItem {
  start_frame: number;
  end_frame: number;
  length: number;
  context_before: number | null;
  context_after: number | null;
  candidates: Record<string, CandidateRun[]>;
}

export interface BlanksResponse {
  pending: BlankItem[];
  resolved_count: number;
  pending_count: number;
}

export interface ResolutionRequest {
  start_frame: number;
  end_frame: number;
  label: number;
  inspector_id: string;
  submission_id: string;
  note?: string;
}

export interface ResolutionResponse {
  applied: boolean;
  pending: BlankItem[];
  pending_count: number;
  resolved_count: number;
}

export interface BoundaryBin {
  distance: number;
  frames_at_distance: number;
  disagreeing_frames: number;
}

export interface StatsResponse {
  annotator_ids: string[];
  pairwise: number[][];
  unanimity_coverage: number;
  reference_annotator: string;
  boundary_profile: {
    max_distance: number;
    bins: BoundaryBin[];
  };
}

export interface ConsensusSummary {
  case_id: string;
  annotators: string[];
  frames: number;
  coverage: number;
  blank_frames: number;
  blank_segments: number;
}

/** Error carrying the HTTP status so callers can branch on 409. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, detail: unknown) {
    super(typeof detail === 'string' ? detail : `request failed (${status})`);
    this.status = status;
    this.detail = detail;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = '', fetchFn: FetchLike = (...a) => fetch(...a)) {
    this.base = base.replace(/\/$/, '');
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let detail: unknown;
      try {
        const body = (await response.json()) as { detail?: unknown };
        detail = body.detail ?? body;
      } catch {
        detail = response.statusText;
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listProjects(): Promise<{ projects: string[] }> {
    return this.request('/api/projects');
  }

  listCases(project: string): Promise<{ cases: string[] }> {
    return this.request(`/api/projects/${project}/cases`);
  }

  getTaxonomy(project: string): Promise<Taxonomy> {
    return this.request(`/api/projects/${project}/taxonomy`);
  }

  getTracks(project: string, caseId: string): Promise<TracksResponse> {
    return this.request(`/api/projects/${project}/cases/${caseId}/tracks`);
  }

  runConsensus(project: string, caseId: string): Promise<ConsensusSummary> {
    return this.request(
      `/api/projects/${project}/cases/${caseId}/consensus`,
      { method: 'POST' },
    );
  }

  getBlanks(project: string, caseId: string): Promise<BlanksResponse> {
    return this.request(`/api/projects/${project}/cases/${caseId}/blanks`);
  }

  postResolution(
    project: string,
    caseId: string,
    body: ResolutionRequest,
  ): Promise<ResolutionResponse> {
    return this.request(
      `/api/projects/${project}/cases/${caseId}/resolutions`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(body),
      },
    );
  }

  getStats(project: string, caseId: string): Promise<StatsResponse> {
    return this.request(`/api/projects/${project}/cases/${caseId}/stats`);
  }

  exportUrl(project: string, caseId: string): string {
    return `${this.base}/api/projects/${project}/cases/${caseId}/export`;
  }
}
