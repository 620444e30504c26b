// Console session state: one live query at a time, its streamed trace steps,
// and the provenance badges derived from the result. Successive questions in
// a session train the server-side edge memory; the session only reads.

import { ApiClient } from "./client.js";
import type { QueryResponse, StreamEvent, TraceStep } from "./types.js";

export type Badge = "replay" | "partial-replay" | "cold" | "no-context";

export interface SessionEntry {
  question: string;
  answer: string;
  traceId: string;
  steps: TraceStep[];
  replayEdges: number;
  llmHops: number;
  selectCalls: number;
  tokens: number;
  replayFraction: number;
  memorized: boolean;
  badge: Badge;
}

export function badgeFor(result: QueryResponse): Badge {
  if (result.no_context) return "no-context";
  if (result.select_calls === 0 && result.replay_sufficient === true) return "replay";
  if (result.replay_edges > 0) return "partial-replay";
  return "cold";
}

export class ConsoleSession {
  readonly history: SessionEntry[] = [];
  busy = false;

  constructor(public client: ApiClient) {}

  /** Stream one query; onEvent fires for every live event (animation hook). */
  async submitQuery(
    question: string,
    options: { memorize?: boolean } = {},
    onEvent?: (event: StreamEvent) => void,
  ): Promise<SessionEntry> {
    if (this.busy) throw new Error("a query is already running in this session");
    this.busy = true;
    const steps: TraceStep[] = [];
    let result: QueryResponse | null = null;
    try {
      for await (const event of this.client.queryStream(question, options)) {
        onEvent?.(event);
        if (event.type === "select") {
          const { type: _ignored, ...step } = event;
          steps.push(step as TraceStep);
        } else if (event.type === "result") {
          const { type: _ignored, ...rest } = event;
          result = rest as QueryResponse;
        } else if (event.type === "error") {
          throw new Error(`query failed: ${JSON.stringify(event.detail)}`);
        }
      }
      if (!result) throw new Error("stream ended without a result event");
      const entry: SessionEntry = {
        question,
        answer: result.answer,
        traceId: result.trace_id,
        steps,
        replayEdges: result.replay_edges,
        llmHops: result.hops,
        selectCalls: result.select_calls,
        tokens: result.tokens.total,
        replayFraction: result.replay_fraction,
        memorized: result.memorized,
        badge: badgeFor(result),
      };
      this.history.push(entry);
      return entry;
    } finally {
      this.busy = false;
    }
  }
}
