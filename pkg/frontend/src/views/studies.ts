import { el } from "../dom.js";
import type { StudySummary } from "../types.js";

export function studiesView(studies: StudySummary[], onOpen: (id: string) => void): HTMLElement {
  const root = el("section", { class: "studies" }, el("h2", {}, "Studies"));
  if (studies.length === 0) {
    root.append(el("p", { class: "empty" }, "No studies under the served directory."));
    return root;
  }
  const table = el(
    "table",
    {},
    el(
      "tr",
      {},
      el("th", {}, "study"),
      el("th", {}, "benchmark"),
      el("th", {}, "agents"),
      el("th", {}, "episodes"),
      el("th", {}, "status"),
    ),
  );
  for (const study of studies) {
    const counts = Object.entries(study.status_counts)
      .filter(([, n]) => n > 0)
      .map(([status, n]) => `${n} ${status}`)
      .join(", ");
    const row = el(
      "tr",
      { class: "clickable", onclick: () => onOpen(study.id) },
      el("td", {}, study.id),
      el("td", {}, study.benchmark),
      el("td", {}, study.agents.join(", ")),
      el("td", {}, String(study.n_episodes)),
      el("td", {}, counts),
    );
    table.append(row);
  }
  root.append(table);
  return root;
}
