/** Typed client for the study service HTTP API. */

export interface NextItem {
  done: boolean;
  kind: "stimulus" | "task" | null;
  id: string | null;
}

export interface Stimulus {
  id: string;
  X_train: number[];
  y_train: number[];
  X_test: number[];
  family: string;
  y_range: [number, number] | null;
}

export interface CandidateCurve {
  /** 1-based on-screen position; the server shuffles per participant. */
  position: number;
  curve: number[];
}

export interface OccamTask {
  task_id: string;
  X: number[];
  y: number[];
  display_grid: number[];
  curves: CandidateCurve[];
  shuffle_token: string;
}

export interface ResponseSubmission {
  participant_id: string;
  stimulus_id: string;
  y_star: number[];
  response_time_s: number;
}

export interface RankingSubmission {
  participant_id: string;
  task_id: string;
  shuffle_token: string;
  /** Display positions, best first. */
  order: number[];
  plausibility_answer?: string | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
        else detail = JSON.stringify(body);
      } catch {
        /* non-JSON error body; keep statusText */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/api/health");
  }

  next(participantId: string): Promise<NextItem> {
    return this.request(`/api/study/${encodeURIComponent(participantId)}/next`);
  }

  stimulus(id: string): Promise<Stimulus> {
    return this.request(`/api/stimuli/${encodeURIComponent(id)}`);
  }

  occamTask(taskId: string, participantId: string): Promise<OccamTask> {
    const q = `participant_id=${encodeURIComponent(participantId)}`;
    return this.request(`/api/occam/${encodeURIComponent(taskId)}?${q}`);
  }

  submitResponse(body: ResponseSubmission): Promise<unknown> {
    return this.request("/api/responses", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  submitRanking(body: RankingSubmission): Promise<unknown> {
    return this.request("/api/rankings", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async exportLines(kind: "responses" | "rankings"): Promise<unknown[]> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/export/${kind}`);
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    const text = await resp.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line));
  }
}
