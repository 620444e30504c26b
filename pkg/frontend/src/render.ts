// DOM rendering: SVG graph with heat coloring plus the session panel.
// Browser-only; all state it draws comes from session.ts / heat.ts.

import type { HeatEdgeView } from "./heat.js";
import type { LayoutEdge, LayoutNode } from "./layout.js";
import type { SessionEntry } from "./session.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const KIND_COLOR: Record<string, string> = {
  entity: "#4a7fb5",
  anchor: "#b5884a",
  chunk: "#999999",
};

export function heatColor(value: number): string {
  // signed scale: blue (penalized) through grey to red (enhanced)
  const clamped = Math.max(-1, Math.min(1, value));
  if (clamped >= 0) {
    const t = clamped;
    return `rgb(${Math.round(180 + 75 * t)}, ${Math.round(180 - 140 * t)}, ${Math.round(180 - 140 * t)})`;
  }
  const t = -clamped;
  return `rgb(${Math.round(180 - 140 * t)}, ${Math.round(180 - 140 * t)}, ${Math.round(180 + 75 * t)})`;
}

export function renderGraph(
  svg: SVGSVGElement,
  nodes: LayoutNode[],
  edges: LayoutEdge[],
  heat: Map<number, HeatEdgeView>,
  lambda: number,
  highlight: Set<number>,
): void {
  svg.innerHTML = "";
  const nodeById = new Map(nodes.map((n) => [n.id, n]));
  for (const edge of edges) {
    const a = nodeById.get(edge.source);
    const b = nodeById.get(edge.target);
    if (!a || !b) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    const view = heat.get(edge.id);
    const value = view ? (view.delta ?? view.projection) : 0;
    line.setAttribute("stroke", heatColor(value));
    const above = view ? view.aboveLambda : false;
    line.setAttribute("stroke-width", above ? "3.5" : highlight.has(edge.id) ? "2.5" : "1");
    if (view && view.projection > lambda) line.setAttribute("stroke-dasharray", "");
    line.appendChild(title(`edge ${edge.id} (${edge.kind})` +
      (view ? ` proj=${view.projection.toFixed(3)} norm=${view.norm.toFixed(3)} ${view.provenance}` : "")));
    svg.appendChild(line);
  }
  for (const node of nodes) {
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(node.x));
    circle.setAttribute("cy", String(node.y));
    circle.setAttribute("r", node.kind === "entity" ? "9" : node.kind === "anchor" ? "11" : "5");
    circle.setAttribute("fill", KIND_COLOR[node.kind] ?? "#888");
    circle.appendChild(title(`${node.label} (${node.id})`));
    svg.appendChild(circle);
    if (node.kind !== "chunk") {
      const text = document.createElementNS(SVG_NS, "text");
      text.setAttribute("x", String(node.x + 12));
      text.setAttribute("y", String(node.y + 4));
      text.setAttribute("class", "node-label");
      text.textContent = node.label.length > 28 ? `${node.label.slice(0, 27)}…` : node.label;
      svg.appendChild(text);
    }
  }
}

function title(text: string): SVGTitleElement {
  const el = document.createElementNS(SVG_NS, "title");
  el.textContent = text;
  return el;
}

export function renderEntry(container: HTMLElement, entry: SessionEntry): void {
  const card = document.createElement("div");
  card.className = "entry";
  card.innerHTML = `
    <div class="q">${escapeHtml(entry.question)}</div>
    <div class="a">${escapeHtml(entry.answer)}</div>
    <div class="meta">
      <span class="badge badge-${entry.badge}">${entry.badge}</span>
      <span>${entry.llmHops} hops</span>
      <span>${entry.selectCalls} selection calls</span>
      <span>${entry.tokens} tokens</span>
      <span>replay ${(entry.replayFraction * 100).toFixed(0)}%</span>
      ${entry.memorized ? "<span>memorized</span>" : ""}
    </div>`;
  container.prepend(card);
}

export function renderStepFeed(feed: HTMLElement, text: string): void {
  const line = document.createElement("div");
  line.className = "step";
  line.textContent = text;
  feed.appendChild(line);
  feed.scrollTop = feed.scrollHeight;
}

function escapeHtml(raw: string): string {
  return raw.replace(/[&<>"]/g, (ch) =>
    ch === "&" ? "&amp;" : ch === "<" ? "&lt;" : ch === ">" ? "&gt;" : "&quot;");
}
