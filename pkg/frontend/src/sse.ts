import type { LiveEvent } from "./types.js";

/** Incremental parser for a server-sent-event byte stream. Feed it chunks;
 * it yields complete events. Kept free of fetch so it is unit-testable. */
export class SseParser {
  private buffer = "";

  push(chunk: string): Array<{ id: number; event: string; data: unknown }> {
    this.buffer += chunk;
    const events: Array<{ id: number; event: string; data: unknown }> = [];
    let boundary: number;
    while ((boundary = this.buffer.indexOf("\n\n")) !== -1) {
      const frame = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      const parsed = parseFrame(frame);
      if (parsed) events.push(parsed);
    }
    return events;
  }
}

function parseFrame(frame: string): { id: number; event: string; data: unknown } | null {
  let id = -1;
  let event = "message";
  const dataLines: string[] = [];
  for (const line of frame.split("\n")) {
    if (line.startsWith("id: ")) id = Number(line.slice(4));
    else if (line.startsWith("event: ")) event = line.slice(7);
    else if (line.startsWith("data: ")) dataLines.push(line.slice(6));
  }
  if (dataLines.length === 0) return null;
  return { id, event, data: JSON.parse(dataLines.join("\n")) };
}

export interface LiveStreamHandlers {
  onEvent?: (event: LiveEvent) => void;
  onGap?: (expected: number, got: number) => void;
  onEnd?: () => void;
}

/** Reads a live event stream over fetch streaming (works in browsers and
 * node). Verifies that event ids arrive in order with no gaps. */
export async function streamEvents(
  url: string,
  handlers: LiveStreamHandlers,
  signal?: AbortSignal,
): Promise<LiveEvent[]> {
  const response = await fetch(url, { signal });
  if (!response.ok || response.body === null) {
    throw new Error(`event stream failed: ${response.status}`);
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser();
  const seen: LiveEvent[] = [];
  let expected = 0;
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    for (const raw of parser.push(decoder.decode(value, { stream: true }))) {
      const event = raw as LiveEvent;
      if (event.id !== expected) {
        handlers.onGap?.(expected, event.id);
        throw new Error(`event stream gap: expected id ${expected}, got ${event.id}`);
      }
      expected += 1;
      seen.push(event);
      handlers.onEvent?.(event);
    }
  }
  handlers.onEnd?.();
  return seen;
}
