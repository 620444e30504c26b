// Memory-heat computation: recolor edges by the projection of their memory
// onto a probe query, with a lambda threshold line and optional signed delta
// against a stored baseline (so penalization shows up as negative heat).

import type { EdgeDiagnostic } from "./types.js";

export type Provenance = "replay" | `hop ${number}` | "untouched";

export interface HeatEdgeView {
  id: number;
  a: string;
  b: string;
  kind: string;
  label: string;
  norm: number;
  updateCount: number;
  projection: number;
  aboveLambda: boolean;
  /** projection minus the stored baseline; negative = penalized since then */
  delta: number | null;
  provenance: Provenance;
}

export interface HeatOptions {
  lambda: number;
  /** edge id -> projection captured before the latest memorization */
  baseline?: Map<number, number>;
  /** provenance of the currently selected trace, edge id -> tag */
  provenanceByEdge?: Map<number, Provenance>;
  kindFilter?: Set<string>;
  minHeat?: number;
}

export function computeHeat(edges: EdgeDiagnostic[], options: HeatOptions): HeatEdgeView[] {
  const views: HeatEdgeView[] = [];
  for (const edge of edges) {
    if (options.kindFilter && !options.kindFilter.has(edge.kind)) continue;
    const projection = edge.projection ?? 0;
    if (options.minHeat !== undefined && Math.abs(projection) < options.minHeat) continue;
    const baseline = options.baseline?.get(edge.id);
    views.push({
      id: edge.id,
      a: edge.a,
      b: edge.b,
      kind: edge.kind,
      label: edge.label,
      norm: edge.norm,
      updateCount: edge.update_count,
      projection,
      aboveLambda: projection > options.lambda,
      delta: baseline === undefined ? null : projection - baseline,
      provenance: options.provenanceByEdge?.get(edge.id) ?? "untouched",
    });
  }
  views.sort((x, y) => y.projection - x.projection);
  return views;
}

export function baselineFrom(edges: EdgeDiagnostic[]): Map<number, number> {
  return new Map(edges.map((e) => [e.id, e.projection ?? 0]));
}

export function provenanceFromTrace(edgeProvenance: Record<string, string>): Map<number, Provenance> {
  // server tags: "seed" | "replay" | "hop:N" | "access:<inner>"
  const map = new Map<number, Provenance>();
  for (const [id, raw] of Object.entries(edgeProvenance)) {
    const tag = raw.startsWith("access:") ? raw.slice("access:".length) : raw;
    if (tag.startsWith("hop:")) {
      map.set(Number(id), `hop ${Number(tag.slice(4))}`);
    } else {
      map.set(Number(id), "replay");
    }
  }
  return map;
}

/** Signed heat bucket for rendering: -1..1 clamped. */
export function heatColorValue(view: HeatEdgeView): number {
  const value = view.delta ?? view.projection;
  return Math.max(-1, Math.min(1, value));
}
