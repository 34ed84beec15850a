import { el, clear } from "../dom.js";
import type { ApiClient } from "../api.js";
import type { ChatMessage, LiveEvent } from "../types.js";
import { streamEvents } from "../sse.js";
import { chatLine } from "./stepmodel.js";

/** Live chat console: transcript on the left mirroring the environment chat,
 * the agent's observation/action feed on the right, and an input box that
 * posts user messages into the running episode. */
export function chatConsole(client: ApiClient, sessionId: string): HTMLElement {
  const transcript = el("div", { class: "transcript" });
  const feed = el("div", { class: "feed" });
  const status = el("p", { class: "status" }, "connecting...");

  const input = el("input", { type: "text", placeholder: "message the agent..." }) as HTMLInputElement;
  const send = el(
    "button",
    {
      onclick: async () => {
        const text = input.value.trim();
        if (!text) return;
        input.value = "";
        try {
          await client.postChat(sessionId, text);
        } catch (error) {
          status.textContent = `cannot send: ${error}`;
        }
      },
    },
    "send",
  ) as HTMLButtonElement;

  const refreshTranscript = async () => {
    const view = await client.getSession(sessionId);
    clear(transcript);
    for (const message of view.chat as ChatMessage[]) {
      transcript.append(el("p", { class: `msg ${message.role}` }, chatLine(message)));
    }
    status.textContent = `session ${view.session_id}: ${view.status} (${view.step_count} steps)`;
    if (view.status === "done" || view.status === "error") send.disabled = true;
  };

  const onEvent = (event: LiveEvent) => {
    if (event.event === "step") {
      feed.append(
        el(
          "div",
          { class: "step-card" },
          el("h5", {}, `step ${event.data.step}`),
          el("pre", { class: "think" }, event.data.think),
          el("pre", { class: "action" }, event.data.action),
          event.data.last_action_error
            ? el("pre", { class: "error" }, event.data.last_action_error)
            : null,
        ),
      );
    }
    void refreshTranscript();
  };

  void refreshTranscript();
  streamEvents(client.eventsUrl(sessionId), { onEvent, onEnd: () => void refreshTranscript() }).catch(
    (error) => {
      status.textContent = `stream ended: ${error}`;
    },
  );

  return el(
    "section",
    { class: "console" },
    status,
    el(
      "div",
      { class: "console-panes" },
      el("div", { class: "left" }, el("h3", {}, "Chat"), transcript, el("div", { class: "compose" }, input, send)),
      el("div", { class: "right" }, el("h3", {}, "Agent steps"), feed),
    ),
  );
}
