// Headless logic: SSE framing, badge rules, heat computation, pinned layout.

import { describe, expect, it } from "vitest";

import { baselineFrom, computeHeat, provenanceFromTrace } from "../src/heat.js";
import { DEFAULT_LAYOUT, layoutGraph } from "../src/layout.js";
import { parseSseChunk } from "../src/sse.js";
import { badgeFor } from "../src/session.js";
import type { EdgeDiagnostic, GraphNode, QueryResponse } from "../src/types.js";

function edge(partial: Partial<EdgeDiagnostic> & { id: number }): EdgeDiagnostic {
  return {
    a: "e1", b: "e2", kind: "EntityEntity", label: "", norm: 0,
    update_count: 0, projection: 0, memory: null, ...partial,
  };
}

describe("sse parser", () => {
  it("splits complete blocks and keeps the remainder", () => {
    const { messages, rest } = parseSseChunk(
      "event: select\ndata: {\"a\":1}\n\nevent: result\ndata: {\"b\":2}\n\nevent: partial\nda",
    );
    expect(messages).toEqual([
      { event: "select", data: '{"a":1}' },
      { event: "result", data: '{"b":2}' },
    ]);
    expect(rest).toContain("partial");
  });

  it("joins multi-line data", () => {
    const { messages } = parseSseChunk("data: one\ndata: two\n\n");
    expect(messages[0]).toEqual({ event: "message", data: "one\ntwo" });
  });
});

describe("badges", () => {
  const base: QueryResponse = {
    answer: "x", trace_id: "t", tokens: { prompt: 1, completion: 1, total: 2 },
    replay_fraction: 0, hops: 0, select_calls: 0, replay_edges: 0,
    memorized: false, no_context: false, replay_sufficient: null,
  };

  it("labels pure replay", () => {
    expect(badgeFor({ ...base, replay_sufficient: true, replay_edges: 3, replay_fraction: 1 }))
      .toBe("replay");
  });

  it("labels resumed replay as partial", () => {
    expect(badgeFor({ ...base, replay_sufficient: false, replay_edges: 2, select_calls: 3, hops: 1 }))
      .toBe("partial-replay");
  });

  it("labels cold and no-context runs", () => {
    expect(badgeFor({ ...base, select_calls: 4, hops: 3 })).toBe("cold");
    expect(badgeFor({ ...base, no_context: true })).toBe("no-context");
  });
});

describe("heat", () => {
  it("thresholds on lambda and sorts by projection", () => {
    const views = computeHeat(
      [edge({ id: 1, projection: 0.64 }), edge({ id: 2, projection: 0.1 }),
       edge({ id: 3, projection: 0.56 })],
      { lambda: 0.55 },
    );
    expect(views.map((v) => v.id)).toEqual([1, 3, 2]);
    expect(views.filter((v) => v.aboveLambda).map((v) => v.id)).toEqual([1, 3]);
  });

  it("computes signed deltas against a baseline", () => {
    const before = [edge({ id: 1, projection: 0.64 })];
    const after = [edge({ id: 1, projection: 0.41 })];
    const views = computeHeat(after, { lambda: 0.55, baseline: baselineFrom(before) });
    expect(views[0].delta).toBeCloseTo(-0.23, 10);
  });

  it("maps provenance tags including access prefixes", () => {
    const map = provenanceFromTrace({ "1": "replay", "2": "hop:3", "3": "access:hop:3" });
    expect(map.get(1)).toBe("replay");
    expect(map.get(2)).toBe("hop 3");
    expect(map.get(3)).toBe("hop 3");
  });

  it("filters by kind and minimum heat", () => {
    const views = computeHeat(
      [edge({ id: 1, kind: "AnchorChunk", projection: 0.9 }),
       edge({ id: 2, projection: 0.001 })],
      { lambda: 0.55, kindFilter: new Set(["EntityEntity"]), minHeat: 0.01 },
    );
    expect(views).toEqual([]);
  });
});

describe("layout", () => {
  it("pins anchors along the chain in document order", () => {
    const nodes: GraphNode[] = [
      { id: "a1", kind: "anchor", label: "one" },
      { id: "a2", kind: "anchor", label: "two" },
      { id: "a3", kind: "anchor", label: "three" },
      { id: "e1", kind: "entity", label: "x" },
    ];
    const edges = [
      edge({ id: 1, a: "a1", b: "a2", kind: "AnchorAnchor" }),
      edge({ id: 2, a: "a2", b: "a3", kind: "AnchorAnchor" }),
      edge({ id: 3, a: "e1", b: "a2", kind: "EntityAnchor" }),
    ];
    const { nodes: placed } = layoutGraph(nodes, edges, { ...DEFAULT_LAYOUT, iterations: 10 });
    const anchors = placed.filter((n) => n.kind === "anchor");
    expect(anchors.every((n) => n.pinned)).toBe(true);
    const xs = new Map(anchors.map((n) => [n.id, n.x]));
    expect(xs.get("a1")!).toBeLessThan(xs.get("a2")!);
    expect(xs.get("a2")!).toBeLessThan(xs.get("a3")!);
    const ys = new Set(anchors.map((n) => n.y));
    expect(ys.size).toBe(1); // one shared rail
    const entity = placed.find((n) => n.id === "e1")!;
    expect(entity.pinned).toBe(false);
  });

  it("is deterministic for a fixed graph", () => {
    const nodes: GraphNode[] = [
      { id: "e1", kind: "entity", label: "x" },
      { id: "e2", kind: "entity", label: "y" },
    ];
    const edges = [edge({ id: 1, a: "e1", b: "e2" })];
    const one = layoutGraph(nodes, edges);
    const two = layoutGraph(nodes, edges);
    expect(one.nodes).toEqual(two.nodes);
  });
});
