import type { ChatMessage, StepView } from "../types.js";

// Pure projections from a step record to the exact texts the step viewer
// displays. The fidelity contract lives here: these strings are shown
// verbatim, byte for byte, never reformatted.

export interface StepTexts {
  actionText: string;
  promptText: string;
  thinkText: string;
  goalText: string;
  axtreeText: string;
  htmlText: string;
  errorText: string;
  profilingLines: string[];
}

export function stepTexts(step: StepView): StepTexts {
  return {
    actionText: step.action,
    promptText: step.prompt,
    thinkText: step.think,
    goalText: step.goal,
    axtreeText: step.observation.axtree_txt ?? "",
    htmlText: step.observation.html_txt ?? "",
    errorText: step.last_action_error,
    profilingLines: profilingLines(step),
  };
}

export function profilingLines(step: StepView): string[] {
  const tokens = step.profiling.tokens ?? {};
  const lines = [
    `wall: ${step.profiling.wall_ms} ms`,
    `virtual: ${step.profiling.virtual_ms} ms`,
    `prompt tokens: ${tokens["prompt_tokens"] ?? 0}`,
    `completion tokens: ${tokens["completion_tokens"] ?? 0}`,
  ];
  const retries = step.profiling.stats?.["n_retries"];
  if (retries !== undefined) lines.push(`answer retries: ${retries}`);
  return lines;
}

export function chatLine(message: ChatMessage): string {
  const text = message.parts
    .map((part) => (part.kind === "text" ? (part.text ?? "") : `[image ${part.ref ?? "?"}]`))
    .join("");
  return `${message.role}: ${text}`;
}

export function tabLines(step: StepView): string[] {
  const obs = step.observation;
  return obs.open_pages_urls.map((url, index) => {
    const marker = index === obs.active_page_index ? " (active)" : "";
    return `Tab ${index}${marker}: ${obs.open_pages_titles[index] ?? ""} - ${url}`;
  });
}
