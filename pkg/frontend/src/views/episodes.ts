import { el } from "../dom.js";
import type { EpisodeRow } from "../types.js";

const BADGE_CLASS: Record<EpisodeRow["status"], string> = {
  success: "badge ok",
  failure: "badge fail",
  error: "badge error",
  incomplete: "badge pending",
};

export function episodesView(
  studyId: string,
  episodes: EpisodeRow[],
  onOpen: (episodeId: string) => void,
): HTMLElement {
  const root = el("section", { class: "episodes" }, el("h2", {}, `Episodes of ${studyId}`));
  const table = el(
    "table",
    {},
    el(
      "tr",
      {},
      el("th", {}, "agent"),
      el("th", {}, "task"),
      el("th", {}, "seed"),
      el("th", {}, "attempt"),
      el("th", {}, "steps"),
      el("th", {}, "reward"),
      el("th", {}, "status"),
    ),
  );
  for (const episode of episodes) {
    table.append(
      el(
        "tr",
        { class: "clickable", onclick: () => onOpen(episode.episode_id) },
        el("td", {}, episode.agent),
        el("td", {}, episode.task_id),
        el("td", {}, String(episode.seed)),
        el("td", {}, String(episode.attempt)),
        el("td", {}, String(episode.n_steps)),
        el("td", {}, episode.reward.toFixed(2)),
        el("td", {}, el("span", { class: BADGE_CLASS[episode.status] }, episode.status)),
      ),
    );
  }
  root.append(table);
  return root;
}
