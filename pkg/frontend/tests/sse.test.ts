import { describe, expect, it } from "vitest";

import { SseParser } from "../src/sse.js";

describe("SseParser", () => {
  it("parses a complete frame", () => {
    const parser = new SseParser();
    const events = parser.push('id: 0\nevent: step\ndata: {"step": 0}\n\n');
    expect(events).toEqual([{ id: 0, event: "step", data: { step: 0 } }]);
  });

  it("reassembles frames split across arbitrary chunk boundaries", () => {
    const parser = new SseParser();
    const frame = 'id: 3\nevent: chat\ndata: {"text": "hello there"}\n\n';
    const collected = [];
    for (const chunk of [frame.slice(0, 7), frame.slice(7, 25), frame.slice(25)]) {
      collected.push(...parser.push(chunk));
    }
    expect(collected).toEqual([{ id: 3, event: "chat", data: { text: "hello there" } }]);
  });

  it("parses several frames from one chunk, keeping order", () => {
    const parser = new SseParser();
    const events = parser.push(
      'id: 0\nevent: status\ndata: {"status": "running"}\n\nid: 1\nevent: step\ndata: {"step": 0}\n\n',
    );
    expect(events.map((e) => e.id)).toEqual([0, 1]);
    expect(events.map((e) => e.event)).toEqual(["status", "step"]);
  });

  it("ignores frames without data", () => {
    const parser = new SseParser();
    expect(parser.push(": keepalive\n\n")).toEqual([]);
  });
});
