// Minimal server-sent-events reader over fetch streaming. Works in both the
// browser and node 20, unlike the DOM EventSource (which cannot set headers
// and is missing under vitest).

export interface SseMessage {
  event: string;
  data: string;
}

export function parseSseChunk(buffer: string): { messages: SseMessage[]; rest: string } {
  const messages: SseMessage[] = [];
  const blocks = buffer.split("\n\n");
  const rest = blocks.pop() ?? "";
  for (const block of blocks) {
    if (!block.trim()) continue;
    let event = "message";
    const dataLines: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith("event:")) event = line.slice(6).trim();
      else if (line.startsWith("data:")) dataLines.push(line.slice(5).trim());
    }
    messages.push({ event, data: dataLines.join("\n") });
  }
  return { messages, rest };
}

export async function* readSse(
  url: string,
  init?: RequestInit,
): AsyncGenerator<SseMessage> {
  const resp = await fetch(url, { ...init, headers: { Accept: "text/event-stream", ...(init?.headers ?? {}) } });
  if (!resp.ok || !resp.body) {
    throw new Error(`stream failed: ${resp.status} ${resp.statusText}`);
  }
  const reader = resp.body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    const { messages, rest } = parseSseChunk(buffer);
    buffer = rest;
    for (const message of messages) yield message;
  }
  const tail = parseSseChunk(buffer + "\n\n");
  for (const message of tail.messages) yield message;
}
