import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { stepTexts, tabLines } from "../src/views/stepmodel.js";
import { episodeDirFor, readPersistedSteps, startHarness, type Harness } from "./harness.js";

let harness: Harness;
let client: ApiClient;

beforeAll(async () => {
  harness = await startHarness();
  client = new ApiClient(harness.baseUrl);
}, 120000);

afterAll(() => {
  harness?.stop();
});

describe("trace endpoints", () => {
  it("lists the fixture study with its episode counts", async () => {
    const studies = await client.listStudies();
    expect(studies).toHaveLength(1);
    const study = studies[0]!;
    expect(study.benchmark).toBe("synthetic");
    expect(study.n_episodes).toBe(20);
    expect(study.status_counts["success"]).toBe(20);
    expect(study.repro_info["package_version"]).toBeTruthy();
  });

  it("lists episodes with status badges data", async () => {
    const [study] = await client.listStudies();
    const episodes = await client.listEpisodes(study!.id);
    expect(episodes).toHaveLength(20);
    for (const episode of episodes) {
      expect(episode.status).toBe("success");
      expect(episode.n_steps).toBeGreaterThan(0);
    }
  });

  it("B1: displayed action and prompt texts are byte-identical to persisted records", async () => {
    const [study] = await client.listStudies();
    const episodes = await client.listEpisodes(study!.id);
    let sampled = 0;
    for (const episode of episodes) {
      const localId = episode.episode_id.split("/")[1]!;
      const persisted = readPersistedSteps(episodeDirFor(harness.studyDir, localId));
      expect(persisted.length).toBe(episode.n_steps);
      for (let n = 0; n < persisted.length; n += 1) {
        const view = await client.getStep(episode.episode_id, n);
        const texts = stepTexts(view);
        const record = persisted[n]!;
        expect(texts.actionText).toBe(record.action);
        expect(texts.promptText).toBe(record.prompt);
        expect(texts.thinkText).toBe(record.think);
        sampled += 1;
      }
    }
    expect(sampled).toBeGreaterThanOrEqual(20);
  });

  it("renders step navigation bounds from n_steps", async () => {
    const [study] = await client.listStudies();
    const episodes = await client.listEpisodes(study!.id);
    const episode = episodes.find((e) => e.n_steps >= 2) ?? episodes[0]!;
    const view = await client.getStep(episode.episode_id, 0);
    expect(view.n_steps).toBe(episode.n_steps);
    expect(tabLines(view).length).toBeGreaterThan(0);
  });

  it("serves the episode detail and a verified replay report", async () => {
    const [study] = await client.listStudies();
    const episodes = await client.listEpisodes(study!.id);
    const episode = episodes[0]!;
    const detail = await client.getEpisode(episode.episode_id);
    expect(detail.status).toBe("success");
    const replay = await client.getReplay(episode.episode_id);
    expect(replay.verified).toBe(true);
    for (const step of replay.steps) {
      expect(step.prompt_diff).toBe("");
      expect(step.obs_diff).toBe("");
    }
  });

  it("returns 404 for unknown studies, episodes, and steps", async () => {
    await expect(client.listEpisodes("no-such-study")).rejects.toThrowError(ApiError);
    await expect(client.listEpisodes("no-such-study")).rejects.toMatchObject({ status: 404 });
    const [study] = await client.listStudies();
    const episodes = await client.listEpisodes(study!.id);
    await expect(client.getStep(episodes[0]!.episode_id, 9999)).rejects.toMatchObject({ status: 404 });
    await expect(client.getSession("ghost")).rejects.toMatchObject({ status: 404 });
  });
});
