// Client for the rating-collection service. The UI speaks exactly five
// endpoints and nothing else; responses are already role-free on the wire.

export interface WorkerItem {
  item_id: string;
  video_id: string;
  video_url: string;
  caption: string;
  position: number;
  total: number;
}

export interface CompletionSummary {
  hit_id: string;
  count: number;
  worker_id: string;
}

export interface StepResponse {
  done: boolean;
  item?: WorkerItem;
  summary?: CompletionSummary;
  accepted?: boolean;
  replay?: boolean;
}

export interface SessionStart extends StepResponse {
  session_id: string;
  worker_id: string;
  hit_id: string;
  total: number;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body = await response.json();
  if (!response.ok) {
    const err = body?.error ?? {};
    throw new ApiError(response.status, err.code ?? "unknown",
      err.message ?? `request failed with ${response.status}`);
  }
  return body as T;
}

export class Client {
  constructor(private base: string = "") {}

  startSession(workerId: string): Promise<SessionStart> {
    return request<SessionStart>(`${this.base}/api/session`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ worker_id: workerId }),
    });
  }

  next(sessionId: string): Promise<StepResponse> {
    return request<StepResponse>(`${this.base}/api/session/${sessionId}/next`);
  }

  submitRating(sessionId: string, itemId: string, score: number): Promise<StepResponse> {
    if (!Number.isInteger(score) || score < 0 || score > 100) {
      // the slider can only produce integers in range; anything else is a bug
      throw new RangeError(`score must be an integer in [0, 100], got ${score}`);
    }
    return request<StepResponse>(`${this.base}/api/session/${sessionId}/rating`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ item_id: itemId, score }),
    });
  }

  skipItem(sessionId: string, itemId: string): Promise<StepResponse> {
    return request<StepResponse>(`${this.base}/api/session/${sessionId}/rating`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ item_id: itemId, skip: true }),
    });
  }
}
