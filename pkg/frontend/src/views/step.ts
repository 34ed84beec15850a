import { el } from "../dom.js";
import type { ReplayReport, StepView } from "../types.js";
import { chatLine, stepTexts, tabLines } from "./stepmodel.js";

export interface StepViewCallbacks {
  onNavigate: (step: number) => void;
  onLoadReplay: () => Promise<ReplayReport>;
}

export function stepView(step: StepView, callbacks: StepViewCallbacks): HTMLElement {
  const texts = stepTexts(step);
  const root = el("section", { class: "step" });

  const prev = el("button", { onclick: () => callbacks.onNavigate(step.step - 1) }, "previous") as HTMLButtonElement;
  const next = el("button", { onclick: () => callbacks.onNavigate(step.step + 1) }, "next") as HTMLButtonElement;
  // navigation beyond the recorded range is disabled, not requested
  prev.disabled = step.step <= 0;
  next.disabled = step.step >= step.n_steps - 1;
  root.append(
    el(
      "header",
      {},
      el("h2", {}, `${step.episode_id} / step ${step.step} of ${step.n_steps}`),
      prev,
      next,
    ),
  );

  root.append(el("h3", {}, "Goal"), pre(texts.goalText, "goal"));
  root.append(el("h3", {}, "Observation"));
  root.append(el("h4", {}, "Tabs"), pre(tabLines(step).join("\n"), "tabs"));
  if (texts.axtreeText) root.append(el("h4", {}, "AXTree"), pre(texts.axtreeText, "axtree"));
  if (texts.htmlText) root.append(el("h4", {}, "HTML"), pre(texts.htmlText, "html"));
  root.append(
    el("h4", {}, "Chat"),
    pre(step.observation.chat.map(chatLine).join("\n"), "chat"),
  );
  if (texts.errorText) root.append(el("h4", {}, "Action error"), pre(texts.errorText, "error"));

  root.append(el("h3", {}, "Think"), pre(texts.thinkText, "think"));
  root.append(el("h3", {}, "Action"), pre(texts.actionText, "action"));
  root.append(el("h3", {}, "Prompt"), pre(texts.promptText, "prompt"));
  root.append(el("h3", {}, "Profiling"), pre(texts.profilingLines.join("\n"), "profiling"));

  const replayHolder = el("div", { class: "replay" });
  const replayButton = el(
    "button",
    {
      onclick: async () => {
        replayButton.textContent = "replaying...";
        try {
          const report = await callbacks.onLoadReplay();
          replayHolder.replaceChildren(replayView(report, step.step));
        } catch (error) {
          replayHolder.replaceChildren(pre(String(error), "error"));
        } finally {
          replayButton.textContent = "replay diff";
        }
      },
    },
    "replay diff",
  );
  root.append(el("h3", {}, "Replay"), replayButton, replayHolder);
  return root;
}

export function replayView(report: ReplayReport, focusStep: number): HTMLElement {
  const root = el("div", {});
  root.append(
    el(
      "p",
      {},
      report.verified
        ? "Replay verified: every prompt and observation reproduced exactly."
        : `Replay diverged at step ${report.diverged_at}.`,
    ),
  );
  const step = report.steps.find((s) => s.index === focusStep) ?? report.steps[report.steps.length - 1];
  if (!step) return root;
  root.append(el("h4", {}, `Step ${step.index}`));
  const panes = el("div", { class: "diff-panes" });
  panes.append(
    el("div", {}, el("h5", {}, "Prompt diff"), pre(step.prompt_diff || "(empty)", "diff")),
    el("div", {}, el("h5", {}, "Observation diff"), pre(step.obs_diff || "(empty)", "diff")),
  );
  root.append(panes);
  if (step.outcome_mismatch) root.append(pre(step.outcome_mismatch, "error"));
  return root;
}

function pre(text: string, cls: string): HTMLElement {
  return el("pre", { class: cls }, text);
}
