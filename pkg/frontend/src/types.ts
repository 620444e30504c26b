// Server JSON shapes, mirrored from the kgmemo service schemas.

export interface TokenUsage {
  prompt: number;
  completion: number;
  total: number;
}

export interface QueryResponse {
  answer: string;
  trace_id: string;
  tokens: TokenUsage;
  replay_fraction: number;
  hops: number;
  select_calls: number;
  replay_edges: number;
  memorized: boolean;
  no_context: boolean;
  replay_sufficient: boolean | null;
}

export interface TraceStep {
  index: number;
  current: string;
  offered_forward: string[];
  offered_backward: string[];
  decision: string;
  target: string | null;
  hop: number;
  exchange_index: number | null;
}

export interface TraceDetail {
  trace: {
    query: string;
    seeds: string[];
    steps: TraceStep[];
    hops: number;
    select_calls: number;
    replay_nodes: number;
    replay_edges: number;
    replay_sufficient: boolean | null;
    trial_answer: string | null;
    loop_ran: boolean;
    forced_stop: boolean;
  };
  answer: string;
  question: string;
  subgraph_edges: number[];
  edge_provenance: Record<string, string>;
  tokens: TokenUsage;
}

export interface EdgeDiagnostic {
  id: number;
  a: string;
  b: string;
  kind: string;
  label: string;
  norm: number;
  update_count: number;
  projection: number | null;
  memory: number[] | null;
}

export interface GraphNode {
  id: string;
  kind: "entity" | "anchor" | "chunk";
  label: string;
}

export interface GraphPayload {
  version: number;
  stats: Record<string, number>;
  nodes: GraphNode[];
  edges: EdgeDiagnostic[];
}

export interface BuildReport {
  chunk_count: number;
  entities_pre_merge: number;
  entities_post_merge: number;
  edge_counts: Record<string, number>;
  build_tokens: number;
  source_tokens: number;
  token_ratio: number;
  completed: boolean;
  graph_version: number;
}

export interface DocumentIn {
  doc_id: string;
  title?: string;
  text: string;
}

// Events emitted on the /query/stream SSE channel.
export type StreamEvent =
  | ({ type: "replay"; nodes: number; edges: number; seeds: string[] })
  | ({ type: "trial"; sufficient: boolean })
  | ({ type: "select" } & TraceStep)
  | ({ type: "answer"; text: string })
  | ({ type: "memorize"; edges: number })
  | ({ type: "stop"; hops: number })
  | ({ type: "result" } & QueryResponse)
  | ({ type: "error"; detail: unknown });
