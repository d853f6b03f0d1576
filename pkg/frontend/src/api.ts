// Typed client for the session/analysis HTTP API. The transport is injected
// so tests can replay recorded interactions without a network.

export interface CrDisplay {
  cr_generalized: string | null;
  cr_naive: string | null;
}

export interface AnswerRecord {
  answered_count: number;
  connected: boolean;
  ci: number | null;
  ri_nm: number | null;
  cr_generalized: number | null;
  cr_naive: number | null;
  display: CrDisplay;
  replayed?: boolean;
  status?: string;
  next?: [number, number] | null;
}

export interface SessionCreated {
  id: string;
  order: [number, number][];
  labels: string[];
}

export interface NextPair {
  pair?: [number, number];
  labels?: [string, string];
  answered?: number;
  total?: number;
  done?: boolean;
}

export interface Report {
  id: string;
  labels: string[];
  status: string;
  order: [number, number][];
  answers: { i: number; j: number; value: number; timestamp: number }[];
  cr_history: AnswerRecord[];
  series: { generalized: [number, number][]; naive: [number, number][] };
  threshold: number;
  threshold_crossings: { answered_count: number; direction: string }[];
  accepted: boolean;
  weights: { gauge: string; weights: number[] } | null;
  display: { final_cr: string | null };
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, readonly body: unknown) {
    super(`API error ${status}`);
  }
}

export class ApiClient {
  constructor(private baseUrl: string = "", private fetchFn: FetchLike = fetch) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchFn(this.baseUrl + path, init);
    const payload = await response.json().catch(() => null);
    if (!response.ok) throw new ApiError(response.status, payload);
    return payload as T;
  }

  createSession(n: number, labels: string[], policy: string, bounded = false) {
    return this.call<SessionCreated>("POST", "/v1/sessions", { n, labels, policy, bounded });
  }

  next(sessionId: string) {
    return this.call<NextPair>("GET", `/v1/sessions/${sessionId}/next`);
  }

  answer(sessionId: string, i: number, j: number, value: number) {
    return this.call<AnswerRecord>("POST", `/v1/sessions/${sessionId}/answers`, { i, j, value });
  }

  report(sessionId: string) {
    return this.call<Report>("GET", `/v1/sessions/${sessionId}/report`);
  }
}

// The 17-position discrete judgment scale, weakest-inverse to strongest.
export const SCALE_TOKENS = [
  "1/9", "1/8", "1/7", "1/6", "1/5", "1/4", "1/3", "1/2", "1",
  "2", "3", "4", "5", "6", "7", "8", "9",
] as const;

export function tokenValue(token: string): number {
  if (!(SCALE_TOKENS as readonly string[]).includes(token)) {
    throw new Error(`value ${token} is not on the scale`);
  }
  if (token.includes("/")) {
    const [a, b] = token.split("/");
    return Number(a) / Number(b);
  }
  return Number(token);
}
