import type {
  EpisodeDetail,
  EpisodeRow,
  ReplayReport,
  SessionView,
  StepView,
  StudySummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body = await response.text();
  if (!response.ok) {
    let detail = body;
    try {
      detail = (JSON.parse(body) as { error?: string }).error ?? body;
    } catch {
      // non-JSON error body; keep the raw text
    }
    throw new ApiError(response.status, `${response.status} on ${url}: ${detail}`);
  }
  return JSON.parse(body) as T;
}

/** Typed client for the study/live HTTP API. Episode ids contain slashes and
 * colons, so they are URI-encoded per path segment boundary. */
export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  listStudies(): Promise<StudySummary[]> {
    return request(this.url("/api/studies"));
  }

  listEpisodes(studyId: string): Promise<EpisodeRow[]> {
    return request(this.url(`/api/studies/${encodeURIComponent(studyId)}/episodes`));
  }

  getEpisode(episodeId: string): Promise<EpisodeDetail> {
    return request(this.url(`/api/episodes/${episodeId}`));
  }

  getStep(episodeId: string, n: number): Promise<StepView> {
    return request(this.url(`/api/episodes/${episodeId}/steps/${n}`));
  }

  getReplay(episodeId: string): Promise<ReplayReport> {
    return request(this.url(`/api/episodes/${episodeId}/replay`));
  }

  startLive(options: {
    task_id: string;
    seed?: number;
    agent?: "oracle" | "random";
    max_steps?: number;
    step_delay_ms?: number;
  }): Promise<{ session_id: string }> {
    return request(this.url("/api/live"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(options),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return request(this.url(`/api/live/${encodeURIComponent(sessionId)}`));
  }

  postChat(sessionId: string, text: string): Promise<{ ok: boolean }> {
    return request(this.url(`/api/live/${encodeURIComponent(sessionId)}/chat`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  eventsUrl(sessionId: string): string {
    return this.url(`/api/live/${encodeURIComponent(sessionId)}/events`);
  }
}
