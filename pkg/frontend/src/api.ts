/**
 * Typed client for the annotation server API.
 *
 * HTTP failures surface as ApiError with the response status; transient
 * network failures are retried with exponential backoff and never dropped
 * silently.
 */

export interface LoginResponse {
  token: string;
  annotator_id: string;
  role: "annotator" | "facilitator";
  expires_at: string;
}

export interface BatchPost {
  post_id: string;
  text: string;
  url: string | null;
}

export interface BatchResponse {
  round: number;
  total: number;
  labeled: number;
  posts: BatchPost[];
}

export interface LabelResponse {
  post_id: string;
  annotator_id: string;
  round: number;
  decision: string;
  characteristics: string[];
  timestamp: string;
}

export interface Disagreement {
  post_id: string;
  mine: string;
  partner: string;
}

export interface AgreementResponse {
  round: number;
  percent_agreement: number;
  disagreements: Disagreement[];
}

export interface CharacteristicCount {
  characteristic: string;
  count: number;
}

export class ApiError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

const MAX_NETWORK_RETRIES = 4;
const BACKOFF_BASE_MS = 250;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export class ApiClient {
  private token: string | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  get authenticated(): boolean {
    return this.token !== null;
  }

  async login(annotatorId: string, passcode: string): Promise<LoginResponse> {
    const data = await this.request<LoginResponse>("POST", "/api/login", {
      annotator_id: annotatorId,
      passcode,
    });
    this.token = data.token;
    return data;
  }

  logout(): void {
    this.token = null;
  }

  myBatch(round: number): Promise<BatchResponse> {
    return this.request<BatchResponse>("GET", `/api/me/batch?round=${round}`);
  }

  submitLabel(postId: string, decision: string,
              characteristics: string[]): Promise<LabelResponse> {
    return this.request<LabelResponse>("POST", "/api/labels", {
      post_id: postId,
      decision,
      characteristics,
    });
  }

  agreement(round: number): Promise<AgreementResponse> {
    return this.request<AgreementResponse>("GET", `/api/pairs/me/agreement?round=${round}`);
  }

  adjudicate(postId: string, decision: string,
             characteristics: string[] = []): Promise<unknown> {
    return this.request("POST", "/api/adjudications", {
      post_id: postId,
      decision,
      characteristics,
    });
  }

  characteristicsStats(): Promise<{ histogram: CharacteristicCount[] }> {
    return this.request("GET", "/api/stats/characteristics");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    let lastNetworkError: unknown = null;
    for (let attempt = 0; attempt <= MAX_NETWORK_RETRIES; attempt++) {
      if (attempt > 0) {
        await sleep(BACKOFF_BASE_MS * 2 ** (attempt - 1));
      }
      let response: Response;
      try {
        response = await this.fetchFn(this.baseUrl + path, {
          method,
          headers,
          body: body === undefined ? undefined : JSON.stringify(body),
        });
      } catch (error) {
        lastNetworkError = error; // offline or refused: retry with backoff
        continue;
      }
      if (!response.ok) {
        const detail = await response.text().catch(() => "");
        throw new ApiError(response.status, detail || response.statusText);
      }
      return (await response.json()) as T;
    }
    throw new ApiError(0, `network unreachable after ${MAX_NETWORK_RETRIES + 1} attempts: ${lastNetworkError}`);
  }
}
