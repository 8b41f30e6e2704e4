/** Typed client for the /v1 engine service. All state the UI shows comes
 * through here; nothing is computed client-side. */

export type Json = Record<string, unknown>;

export interface ProblemJson extends Json {
  delta: number;
  nodes: unknown[];
  edges: unknown[];
  note?: string;
}

export interface LiftedJson extends Json {
  problem: ProblemJson;
  sets: Record<string, string[]>;
  transform: "re" | "rere";
}

export interface DiagramJson extends Json {
  side: string;
  labels: string[];
  classes: string[][];
  edges: [string, string][];
  dot: string;
}

export interface VerdictJson extends Json {
  holds: boolean;
  witness: unknown;
  narrative: string;
}

export interface HistoryNode {
  id: number;
  parent: number | null;
  op: string;
  input: string | null;
  output: string;
}

export interface CertificateStep {
  index: number;
  params: { delta: number; a: number; x: number };
  stepped: { delta: number; a: number; x: number };
  next: { delta: number; a: number; x: number };
  checks: Record<string, boolean>;
  mechanized?: VerdictJson;
}

export interface CertificateJson extends Json {
  delta: number;
  x0: number;
  epsilon: number;
  t: number;
  x0_within_guidance: boolean;
  steps: CertificateStep[];
  final_params: { delta: number; a: number; x: number };
  final_verdict: VerdictJson;
  statement: string;
  smallest_delta: number | null;
}

export interface JobStatus extends Json {
  job: string;
  status: "running" | "done" | "failed" | "cancelled";
  result?: Json;
  error?: string;
}

/** Error with the service's own payload attached; shown to the user verbatim,
 * including the named failing inequality on 422s. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: Json,
  ) {
    super(String(payload["error"] ?? `request failed with ${status}`));
  }

  get inequality(): string | null {
    return typeof this.payload["inequality"] === "string"
      ? (this.payload["inequality"] as string)
      : null;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<{
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async request(method: string, path: string, body?: Json): Promise<Json> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchFn(this.base + path, init);
    const payload = (await response.json()) as Json;
    // 202 (job accepted) and 2xx are fine; everything else carries an error payload.
    if (response.status >= 400) throw new ApiError(response.status, payload);
    return payload;
  }

  createSession(): Promise<{ id: string }> {
    return this.request("POST", "/v1/sessions") as Promise<{ id: string }>;
  }

  addProblem(sid: string, name: string, text: string): Promise<{ ref: string; node: HistoryNode }> {
    return this.request("POST", `/v1/sessions/${sid}/problems`, { name, text, parent: null }) as Promise<{
      ref: string;
      node: HistoryNode;
    }>;
  }

  apply(sid: string, body: Json): Promise<{ ref: string; node: HistoryNode }> {
    return this.request("POST", `/v1/sessions/${sid}/apply`, body) as Promise<{
      ref: string;
      node: HistoryNode;
    }>;
  }

  getRef(sid: string, ref: string): Promise<Json> {
    return this.request("GET", `/v1/sessions/${sid}/refs/${ref}`);
  }

  history(sid: string): Promise<{ nodes: HistoryNode[] }> {
    return this.request("GET", `/v1/sessions/${sid}/history`) as Promise<{ nodes: HistoryNode[] }>;
  }

  serialize(problem: ProblemJson): Promise<{ text: string }> {
    return this.request("POST", "/v1/serialize", { problem }) as Promise<{ text: string }>;
  }

  exportSession(sid: string): Promise<Json> {
    return this.request("GET", `/v1/sessions/${sid}/export`);
  }

  importSession(data: Json): Promise<{ id: string }> {
    return this.request("POST", "/v1/sessions/import", data) as Promise<{ id: string }>;
  }

  submitSequence(delta: number, x0: number, epsilon: number, mechanize = false): Promise<{ job: string }> {
    return this.request("POST", "/v1/sequence", { delta, x0, epsilon, mechanize }) as Promise<{
      job: string;
    }>;
  }

  pollJob(id: string): Promise<JobStatus> {
    return this.request("GET", `/v1/jobs/${id}`) as Promise<JobStatus>;
  }

  cancelJob(id: string): Promise<Json> {
    return this.request("DELETE", `/v1/jobs/${id}`);
  }
}
