// Typed fetch client over the kgmemo service. The console never recomputes
// memory math client-side; every number rendered comes from these endpoints.

import { readSse } from "./sse.js";
import type {
  BuildReport,
  DocumentIn,
  EdgeDiagnostic,
  GraphPayload,
  QueryResponse,
  StreamEvent,
  TraceDetail,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(public baseUrl: string, private apiToken?: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.apiToken) headers["x-api-token"] = this.apiToken;
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, `${method} ${path}: ${await resp.text()}`);
    }
    return (await resp.json()) as T;
  }

  healthz(): Promise<{ status: string; graph_loaded: boolean }> {
    return this.request("GET", "/healthz");
  }

  ingest(documents: DocumentIn[]): Promise<BuildReport> {
    return this.request("POST", "/corpus", { documents });
  }

  query(q: string, options: { memorize?: boolean; max_hops?: number; seeds?: number } = {}): Promise<QueryResponse> {
    return this.request("POST", "/query", { q, ...options });
  }

  trace(traceId: string): Promise<TraceDetail> {
    return this.request("GET", `/trace/${traceId}`);
  }

  graph(): Promise<GraphPayload> {
    return this.request("GET", "/graph");
  }

  graphEdges(probe?: string, raw = false): Promise<EdgeDiagnostic[]> {
    const params = new URLSearchParams();
    if (probe) params.set("probe", probe);
    if (raw) params.set("raw", "true");
    const qs = params.toString();
    return this.request("GET", `/graph/edges${qs ? `?${qs}` : ""}`);
  }

  stats(): Promise<{ graph: Record<string, number> | null; usage: Record<string, number>; queries: number }> {
    return this.request("GET", "/stats");
  }

  reset(): Promise<{ cleared: boolean }> {
    return this.request("POST", "/reset");
  }

  async *queryStream(
    q: string,
    options: { memorize?: boolean; max_hops?: number; seeds?: number } = {},
  ): AsyncGenerator<StreamEvent> {
    const params = new URLSearchParams({ q });
    if (options.memorize === false) params.set("memorize", "false");
    if (options.max_hops !== undefined) params.set("max_hops", String(options.max_hops));
    if (options.seeds !== undefined) params.set("seeds", String(options.seeds));
    const headers: Record<string, string> = {};
    if (this.apiToken) headers["x-api-token"] = this.apiToken;
    for await (const message of readSse(`${this.baseUrl}/query/stream?${params}`, { headers })) {
      yield JSON.parse(message.data) as StreamEvent;
    }
  }
}
