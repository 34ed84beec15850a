// JSON shapes served by the study API. Every field here exists verbatim in a
// persisted record or live event; the UI never recomputes trace data.

export interface StudySummary {
  id: string;
  benchmark: string;
  comment: string;
  agents: string[];
  n_episodes: number;
  status_counts: Record<string, number>;
  repro_info: Record<string, string>;
}

export interface EpisodeRow {
  episode_id: string;
  agent: string;
  task_id: string;
  seed: number;
  attempt: number;
  status: "success" | "failure" | "error" | "incomplete";
  reward: number;
  n_steps: number;
}

export interface ChatPart {
  kind: "text" | "image";
  text?: string;
  ref?: string;
}

export interface ChatMessage {
  role: "user" | "assistant" | "infeasible" | "user_feedback";
  parts: ChatPart[];
}

export interface ObservationView {
  goal: string;
  chat: ChatMessage[];
  open_pages_urls: string[];
  open_pages_titles: string[];
  active_page_index: number;
  axtree_txt: string | null;
  html_txt: string | null;
  focused_element_bid: string | null;
  last_action_error: string;
}

export interface Profiling {
  wall_ms: number;
  virtual_ms: number;
  tokens: Record<string, number | boolean>;
  stats: Record<string, number>;
}

export interface StepView {
  study_id: string;
  episode_id: string;
  step: number;
  n_steps: number;
  goal: string;
  observation: ObservationView;
  action: string;
  think: string;
  prompt: string;
  reward: number;
  last_action_error: string;
  profiling: Profiling;
}

export interface EpisodeDetail {
  episode_id: string;
  task_id: string;
  seed: number;
  attempt: number;
  agent: string;
  status: string;
  reward: number;
  n_steps: number;
}

export interface StepReplay {
  index: number;
  action: string;
  prompt_diff: string;
  obs_diff: string;
  outcome_mismatch: string;
  clean: boolean;
}

export interface ReplayReport {
  episode_id: string;
  diverged_at: number | null;
  verified: boolean;
  steps: StepReplay[];
}

export interface SessionView {
  session_id: string;
  task_id: string;
  seed: number;
  status: "starting" | "running" | "done" | "error";
  error: string;
  step_count: number;
  chat: ChatMessage[];
  observation: Record<string, unknown>;
}

export interface LiveStepData {
  step: number;
  action: string;
  think: string;
  prompt: string;
  obs: ObservationView;
  reward: number;
  terminated: boolean;
  truncated: boolean;
  last_action_error: string;
}

export type LiveEvent =
  | { id: number; event: "status"; data: { status: string; goal?: string; error?: string } }
  | { id: number; event: "step"; data: LiveStepData }
  | { id: number; event: "chat"; data: { role: string; text: string } };
