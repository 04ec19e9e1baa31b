/** Typed client for the game service HTTP API. */

export interface ClickView {
  x: [number, number];
  score: number;
  t: number;
}

export interface SessionView {
  session_id: string;
  user_id: string;
  task_index: number;
  shots_used: number;
  shots_max: number;
  best_score: number | null;
  state: 'active' | 'finished';
  clicks: ClickView[];
}

export interface ClickResult {
  score: number;
  shots_remaining: number;
  best_score: number | null;
  state: 'active' | 'finished';
}

export interface TasksInfo {
  count: number;
  shots_max: number;
  task_indices: number[];
}

/** Error body the service returns for every rejected request. */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.name = 'ApiError';
    this.code = code;
    this.status = status;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  /** fetchFn is injectable so tests can run without a server. */
  constructor(baseUrl = '', fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let code = 'HttpError';
      let message = `${response.status}`;
      try {
        const body = (await response.json()) as { code?: string; message?: string };
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(code, message, response.status);
    }
    return (await response.json()) as T;
  }

  tasks(): Promise<TasksInfo> {
    return this.request<TasksInfo>('/api/tasks');
  }

  createSession(userId: string, taskIndex: number): Promise<SessionView> {
    return this.request<SessionView>('/api/sessions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ user_id: userId, task_index: taskIndex }),
    });
  }

  click(sessionId: string, u: number, v: number): Promise<ClickResult> {
    return this.request<ClickResult>(`/api/sessions/${sessionId}/clicks`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ x: [u, v] }),
    });
  }

  close(sessionId: string): Promise<SessionView> {
    return this.request<SessionView>(`/api/sessions/${sessionId}/close`, {
      method: 'POST',
    });
  }

  session(sessionId: string): Promise<SessionView> {
    return this.request<SessionView>(`/api/sessions/${sessionId}`);
  }

  /** Finished sessions as JSONL text, one session per line. */
  async exportSessions(): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/api/export`);
    if (!response.ok) {
      throw new ApiError('HttpError', `${response.status}`, response.status);
    }
    return response.text();
  }
}
