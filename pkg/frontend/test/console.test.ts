// Console contract against the real fixture service: trace animation length,
// replay badge on repeat queries, and the probe heatmap marking exactly the
// memorized effective-path edges.

import { spawn, type ChildProcess } from "node:child_process";
import { once } from "node:events";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/client.js";
import { computeHeat } from "../src/heat.js";
import { ConsoleSession } from "../src/session.js";
import type { DocumentIn, StreamEvent } from "../src/types.js";

const PORT = 8761;
const BASE = `http://127.0.0.1:${PORT}`;
const LAMBDA = 0.55;
const QUESTION = "Tell me which town the founder of the Ember Foundry was born in.";

let service: ChildProcess;

function fixtureDocs(): DocumentIn[] {
  const corpusPath = join(__dirname, "..", "..", "src", "kgmemo", "fixtures",
    "multihop_corpus.jsonl");
  return readFileSync(corpusPath, "utf-8")
    .split("\n")
    .filter((line) => line.trim())
    .map((line) => JSON.parse(line) as DocumentIn);
}

async function waitForService(client: ApiClient, attempts = 60): Promise<void> {
  for (let i = 0; i < attempts; i++) {
    try {
      await client.healthz();
      return;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  service = spawn("kgmemo", ["serve", "--keys", "fixtures:multihop",
    "--port", String(PORT)], { stdio: "ignore" });
  const client = new ApiClient(BASE);
  await waitForService(client);
  const report = await client.ingest(fixtureDocs());
  expect(report.chunk_count).toBe(6);
}, 40_000);

afterAll(async () => {
  if (service && !service.killed) {
    service.kill("SIGTERM");
    await Promise.race([once(service, "exit"), new Promise((r) => setTimeout(r, 3000))]);
  }
});

describe("console contract", () => {
  const client = new ApiClient(BASE);
  const session = new ConsoleSession(client);
  let firstSubgraphEdges: number[] = [];

  it("animates exactly as many steps as the server trace holds", async () => {
    const events: StreamEvent[] = [];
    const entry = await session.submitQuery(QUESTION, {}, (e) => events.push(e));
    expect(entry.answer).toBe("Quarry Hollow");
    expect(entry.badge).toBe("cold");
    expect(entry.memorized).toBe(true);

    const detail = await client.trace(entry.traceId);
    expect(entry.steps.length).toBe(detail.trace.steps.length);
    expect(entry.steps.length).toBeGreaterThanOrEqual(3);
    // the stream preserved server step order
    expect(entry.steps.map((s) => s.index)).toEqual(
      detail.trace.steps.map((s) => s.index));
    firstSubgraphEdges = detail.subgraph_edges;
    expect(firstSubgraphEdges.length).toBeGreaterThan(0);
  }, 30_000);

  it("shows the replay badge with zero hops on the repeat query", async () => {
    const entry = await session.submitQuery(QUESTION);
    expect(entry.badge).toBe("replay");
    expect(entry.llmHops).toBe(0);
    expect(entry.selectCalls).toBe(0);
    expect(entry.steps.length).toBe(0);
    expect(entry.answer).toBe("Quarry Hollow");
    expect(entry.replayFraction).toBe(1);
    expect(entry.memorized).toBe(false);
  }, 30_000);

  it("heatmap marks exactly the effective-path edges above the lambda line", async () => {
    const edges = await client.graphEdges(QUESTION);
    const views = computeHeat(edges, { lambda: LAMBDA });
    const above = views.filter((v) => v.aboveLambda).map((v) => v.id).sort((a, b) => a - b);
    expect(above).toEqual([...firstSubgraphEdges].sort((a, b) => a - b));
    // everything else sits at zero heat
    for (const view of views) {
      if (!above.includes(view.id)) expect(view.projection).toBe(0);
    }
  }, 30_000);

  it("probing with an unrelated query leaves the lambda line unreached", async () => {
    const edges = await client.graphEdges("completely unrelated probe text");
    const views = computeHeat(edges, { lambda: LAMBDA });
    expect(views.some((v) => v.aboveLambda)).toBe(false);
  }, 30_000);
});
