// Browser entry: wires the session loop, trace animation, and the probe
// heatmap controls to the service.

import { ApiClient } from "./client.js";
import { baselineFrom, computeHeat, provenanceFromTrace, type HeatEdgeView } from "./heat.js";
import { DEFAULT_LAYOUT, layoutGraph } from "./layout.js";
import { renderEntry, renderGraph, renderStepFeed } from "./render.js";
import { ConsoleSession } from "./session.js";
import type { EdgeDiagnostic } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const baseUrl = (window as any).KGMEMO_BASE_URL ?? "http://127.0.0.1:8011";
const client = new ApiClient(baseUrl);
const session = new ConsoleSession(client);

let lambda = 0.55;
let baseline: Map<number, number> | undefined;
let provenance: Map<number, `hop ${number}` | "replay" | "untouched"> | undefined;
let highlight = new Set<number>();

async function refreshGraph(probe: string): Promise<void> {
  const payload = await client.graph();
  const edges: EdgeDiagnostic[] = probe ? await client.graphEdges(probe) : payload.edges;
  const heatViews = computeHeat(edges, { lambda, baseline, provenanceByEdge: provenance });
  const heatById = new Map<number, HeatEdgeView>(heatViews.map((v) => [v.id, v]));
  const { nodes, edges: layoutEdges } = layoutGraph(payload.nodes, edges, DEFAULT_LAYOUT);
  renderGraph($("graph") as unknown as SVGSVGElement, nodes, layoutEdges, heatById, lambda, highlight);
  const above = heatViews.filter((v) => v.aboveLambda);
  $("heat-summary").textContent = probe
    ? `${above.length} edge(s) above the ${lambda} line for this probe`
    : "no probe set";
}

async function submit(): Promise<void> {
  const box = $<HTMLInputElement>("query-box");
  const question = box.value.trim();
  if (!question || session.busy) return;
  const feed = $("step-feed");
  feed.innerHTML = "";
  $("answer").textContent = "…";
  const probeBox = $<HTMLInputElement>("probe-box");
  const edgesBefore = await client.graphEdges(question).catch(() => null);
  try {
    const entry = await session.submitQuery(question, {}, (event) => {
      if (event.type === "replay") {
        renderStepFeed(feed, `replay expanded ${event.edges} edge(s) from seeds ${event.seeds.join(", ")}`);
      } else if (event.type === "trial") {
        renderStepFeed(feed, event.sufficient
          ? "replayed subgraph answered the question"
          : "replayed subgraph was not enough; resuming traversal");
      } else if (event.type === "select") {
        renderStepFeed(feed, `step ${event.index + 1}: ${event.decision}` +
          (event.target ? ` -> ${event.target}` : "") + ` (hop ${event.hop})`);
      } else if (event.type === "memorize") {
        renderStepFeed(feed, `memorized ${event.edges} edge(s)`);
      }
    });
    $("answer").textContent = entry.answer;
    renderEntry($("history"), entry);
    const detail = await client.trace(entry.traceId);
    provenance = provenanceFromTrace(detail.edge_provenance);
    highlight = new Set(detail.subgraph_edges);
    if (edgesBefore) baseline = baselineFrom(edgesBefore);
    if (!probeBox.value) probeBox.value = question;
    await refreshGraph(probeBox.value);
  } catch (error) {
    $("answer").textContent = String(error);
  } finally {
    box.value = "";
    box.focus(); // the session loop: next question is ready to type
  }
}

async function init(): Promise<void> {
  $<HTMLButtonElement>("submit").addEventListener("click", () => void submit());
  $<HTMLInputElement>("query-box").addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") void submit();
  });
  $<HTMLInputElement>("probe-box").addEventListener("change", () => {
    void refreshGraph($<HTMLInputElement>("probe-box").value);
  });
  const slider = $<HTMLInputElement>("lambda-slider");
  slider.addEventListener("input", () => {
    lambda = Number(slider.value);
    $("lambda-value").textContent = lambda.toFixed(2);
    void refreshGraph($<HTMLInputElement>("probe-box").value);
  });
  const health = await client.healthz();
  $("status").textContent = health.graph_loaded ? "graph loaded" : "no graph loaded yet";
  if (health.graph_loaded) await refreshGraph("");
  $<HTMLInputElement>("query-box").focus();
}

void init();
