// Force-directed layout with the anchor chain pinned along a horizontal
// rail, keeping the document skeleton legible while entities settle around
// it. Pure math, no DOM: the renderer reads positions, tests run headless.

import type { EdgeDiagnostic, GraphNode } from "./types.js";

export interface LayoutNode {
  id: string;
  kind: string;
  label: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  pinned: boolean;
}

export interface LayoutEdge {
  id: number;
  source: string;
  target: string;
  kind: string;
}

export interface LayoutOptions {
  width: number;
  height: number;
  linkDistance: number;
  repulsion: number;
  iterations: number;
}

export const DEFAULT_LAYOUT: LayoutOptions = {
  width: 960,
  height: 600,
  linkDistance: 80,
  repulsion: 2200,
  iterations: 150,
};

function chainOrder(nodes: GraphNode[], edges: EdgeDiagnostic[]): string[] {
  // follow AnchorAnchor edges to list anchors in document order
  const anchors = nodes.filter((n) => n.kind === "anchor").map((n) => n.id);
  const next = new Map<string, string>();
  const hasPrev = new Set<string>();
  for (const e of edges) {
    if (e.kind !== "AnchorAnchor") continue;
    // snapshot ids are ordinal: the lower id precedes the higher one
    const [lo, hi] = Number(e.a.slice(1)) < Number(e.b.slice(1)) ? [e.a, e.b] : [e.b, e.a];
    next.set(lo, hi);
    hasPrev.add(hi);
  }
  const ordered: string[] = [];
  const heads = anchors.filter((a) => !hasPrev.has(a));
  for (const head of heads.sort()) {
    let cursor: string | undefined = head;
    while (cursor && !ordered.includes(cursor)) {
      ordered.push(cursor);
      cursor = next.get(cursor);
    }
  }
  for (const a of anchors) if (!ordered.includes(a)) ordered.push(a);
  return ordered;
}

function seededRandom(seed: number): () => number {
  let state = seed >>> 0 || 1;
  return () => {
    state = (state * 1664525 + 1013904223) >>> 0;
    return state / 0xffffffff;
  };
}

export function layoutGraph(
  nodes: GraphNode[],
  edges: EdgeDiagnostic[],
  options: LayoutOptions = DEFAULT_LAYOUT,
): { nodes: LayoutNode[]; edges: LayoutEdge[] } {
  const rand = seededRandom(nodes.length * 2654435761 + edges.length);
  const rail = chainOrder(nodes, edges);
  const railY = options.height * 0.75;
  const railStep = rail.length > 1 ? options.width / (rail.length + 1) : options.width / 2;

  const layout = new Map<string, LayoutNode>();
  for (const node of nodes) {
    const railIndex = rail.indexOf(node.id);
    const pinned = node.kind === "anchor" && railIndex >= 0;
    layout.set(node.id, {
      id: node.id,
      kind: node.kind,
      label: node.label,
      x: pinned ? railStep * (railIndex + 1) : options.width * (0.15 + 0.7 * rand()),
      y: pinned ? railY : options.height * (0.1 + 0.5 * rand()),
      vx: 0,
      vy: 0,
      pinned,
    });
  }
  // chunks sit just under their anchor
  for (const e of edges) {
    if (e.kind !== "AnchorChunk") continue;
    const anchor = layout.get(e.a.startsWith("a") ? e.a : e.b);
    const chunk = layout.get(e.a.startsWith("c") ? e.a : e.b);
    if (anchor && chunk) {
      chunk.x = anchor.x;
      chunk.y = anchor.y + 40;
      chunk.pinned = true;
    }
  }

  const free = [...layout.values()].filter((n) => !n.pinned);
  const all = [...layout.values()];
  for (let iter = 0; iter < options.iterations; iter++) {
    for (const node of free) {
      let fx = 0;
      let fy = 0;
      for (const other of all) {
        if (other === node) continue;
        const dx = node.x - other.x;
        const dy = node.y - other.y;
        const dist2 = Math.max(dx * dx + dy * dy, 25);
        const push = options.repulsion / dist2;
        const dist = Math.sqrt(dist2);
        fx += (dx / dist) * push;
        fy += (dy / dist) * push;
      }
      for (const e of edges) {
        if (e.a !== node.id && e.b !== node.id) continue;
        const other = layout.get(e.a === node.id ? e.b : e.a);
        if (!other) continue;
        const dx = other.x - node.x;
        const dy = other.y - node.y;
        const dist = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
        const pull = (dist - options.linkDistance) * 0.05;
        fx += (dx / dist) * pull;
        fy += (dy / dist) * pull;
      }
      node.vx = (node.vx + fx) * 0.5;
      node.vy = (node.vy + fy) * 0.5;
    }
    for (const node of free) {
      node.x = Math.min(Math.max(node.x + node.vx, 20), options.width - 20);
      node.y = Math.min(Math.max(node.y + node.vy, 20), options.height - 20);
    }
  }

  return {
    nodes: [...layout.values()],
    edges: edges.map((e) => ({ id: e.id, source: e.a, target: e.b, kind: e.kind })),
  };
}
