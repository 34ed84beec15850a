import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { chatConsole } from "./views/chat.js";
import { episodesView } from "./views/episodes.js";
import { stepView } from "./views/step.js";
import { studiesView } from "./views/studies.js";

// Hash routes:
//   #/                                  study list
//   #/study/<studyId>                   episode table
//   #/episode/<episodeId>/<n>           step viewer
//   #/live/<sessionId>                  chat console

const client = new ApiClient("");
const outlet = document.getElementById("outlet") as HTMLElement;

function navigate(hash: string): void {
  window.location.hash = hash;
}

async function render(): Promise<void> {
  const hash = window.location.hash.replace(/^#\/?/, "");
  clear(outlet);
  try {
    if (hash === "") {
      const studies = await client.listStudies();
      outlet.append(studiesView(studies, (id) => navigate(`#/study/${encodeURIComponent(id)}`)));
      outlet.append(liveLauncher());
    } else if (hash.startsWith("study/")) {
      const studyId = decodeURIComponent(hash.slice("study/".length));
      const episodes = await client.listEpisodes(studyId);
      outlet.append(episodesView(studyId, episodes, (episodeId) => navigate(`#/episode/${episodeId}/0`)));
    } else if (hash.startsWith("episode/")) {
      const rest = hash.slice("episode/".length);
      const slash = rest.lastIndexOf("/");
      const episodeId = rest.slice(0, slash);
      const n = Number(rest.slice(slash + 1));
      const step = await client.getStep(episodeId, n);
      outlet.append(
        stepView(step, {
          onNavigate: (target) => navigate(`#/episode/${episodeId}/${target}`),
          onLoadReplay: () => client.getReplay(episodeId),
        }),
      );
    } else if (hash.startsWith("live/")) {
      const sessionId = decodeURIComponent(hash.slice("live/".length));
      outlet.append(chatConsole(client, sessionId));
    } else {
      outlet.append(el("p", {}, `unknown route: ${hash}`));
    }
  } catch (error) {
    outlet.append(el("pre", { class: "error" }, String(error)));
  }
}

function liveLauncher(): HTMLElement {
  const task = el("input", { type: "text", value: "synth.search-and-answer" }) as HTMLInputElement;
  const seed = el("input", { type: "number", value: "0" }) as HTMLInputElement;
  const agent = el("select", {}) as HTMLSelectElement;
  for (const kind of ["oracle", "random"]) {
    agent.append(el("option", { value: kind }, kind));
  }
  const start = el(
    "button",
    {
      onclick: async () => {
        const session = await client.startLive({
          task_id: task.value,
          seed: Number(seed.value),
          agent: agent.value as "oracle" | "random",
          step_delay_ms: 400,
        });
        navigate(`#/live/${session.session_id}`);
      },
    },
    "start live session",
  );
  return el(
    "section",
    { class: "launcher" },
    el("h2", {}, "Live session"),
    el("label", {}, "task ", task),
    el("label", {}, " seed ", seed),
    el("label", {}, " agent ", agent),
    start,
  );
}

window.addEventListener("hashchange", () => void render());
void render();
