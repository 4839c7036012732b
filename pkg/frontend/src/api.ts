// Typed client for the editing service. The fetch implementation is
// injectable so tests can run without a network or a DOM.

import type {
  AlignResult,
  GenerateMode,
  JobDoc,
  MutationOp,
  ProjectDoc,
  RankedClip,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, "conflict", message);
    this.name = "ConflictError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ApiClient {
  ingest(video: string, projectId?: string): Promise<ProjectDoc>;
  getProject(projectId: string): Promise<ProjectDoc>;
  generate(projectId: string, mode: GenerateMode, guideClipIds?: string[]): Promise<number>;
  search(projectId: string, q: { kind: "text_prompt"; text: string } | { kind: "by_keyframe"; clipId: string }): Promise<RankedClip[]>;
  revertSearch(projectId: string): Promise<void>;
  alternatives(entryId: string): Promise<RankedClip[]>;
  align(entryId: string): Promise<AlignResult>;
  mutate(projectId: string, baseRevision: number, op: MutationOp, payload: Record<string, unknown>): Promise<number>;
  render(projectId: string): Promise<string>;
  job(jobId: string): Promise<JobDoc>;
  interactions(projectId: string): Promise<string>;
  mediaUrl(projectId: string, relPath: string): string;
}

async function fail(resp: Response): Promise<never> {
  let code = "internal";
  let message = `${resp.status}`;
  try {
    const body = (await resp.json()) as { error?: { code: string; message: string } };
    if (body.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  if (resp.status === 409) throw new ConflictError(message);
  throw new ApiError(resp.status, code, message);
}

export function createApi(baseUrl: string, fetchFn?: FetchLike): ApiClient {
  const doFetch: FetchLike = fetchFn ?? ((input, init) => fetch(input, init));

  async function request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await doFetch(`${baseUrl}${path}`, init);
    if (!resp.ok) await fail(resp);
    return (await resp.json()) as T;
  }

  function post(body: unknown): RequestInit {
    return {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    };
  }

  return {
    ingest: (video, projectId) =>
      request<ProjectDoc>("/projects", post({ video, project_id: projectId ?? null })),
    getProject: (projectId) => request<ProjectDoc>(`/projects/${projectId}`),
    generate: async (projectId, mode, guideClipIds = []) => {
      const out = await request<{ revision: number }>(
        `/projects/${projectId}/generate?mode=${mode}`,
        post({ guide_clip_ids: guideClipIds }),
      );
      return out.revision;
    },
    search: async (projectId, q) => {
      const params = new URLSearchParams({ kind: q.kind });
      if (q.kind === "text_prompt") params.set("text", q.text);
      else params.set("clip_id", q.clipId);
      const out = await request<{ clips: RankedClip[] }>(
        `/projects/${projectId}/search?${params.toString()}`,
      );
      return out.clips;
    },
    revertSearch: async (projectId) => {
      await request(`/projects/${projectId}/search?kind=revert`);
    },
    alternatives: async (entryId) => {
      const out = await request<{ clips: RankedClip[] }>(
        `/entries/${encodeURIComponent(entryId)}/alternatives`,
      );
      return out.clips;
    },
    align: (entryId) => request<AlignResult>(`/entries/${encodeURIComponent(entryId)}/align`),
    mutate: async (projectId, baseRevision, op, payload) => {
      const out = await request<{ revision: number }>(
        `/projects/${projectId}/mutations`,
        post({ base_revision: baseRevision, op, payload }),
      );
      return out.revision;
    },
    render: async (projectId) => {
      const out = await request<{ job_id: string }>(`/projects/${projectId}/render`, {
        method: "POST",
      });
      return out.job_id;
    },
    job: (jobId) => request<JobDoc>(`/jobs/${jobId}`),
    interactions: async (projectId) => {
      const resp = await doFetch(`${baseUrl}/projects/${projectId}/interactions`);
      if (!resp.ok) await fail(resp);
      return resp.text();
    },
    mediaUrl: (projectId, relPath) => `${baseUrl}/media/${projectId}/${relPath}`,
  };
}
