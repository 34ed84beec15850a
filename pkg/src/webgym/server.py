"""HTTP API over study directories plus live, steerable episodes.

Read-only trace endpoints serve persisted records verbatim; the live
endpoints run one episode in a background thread, stream its step/chat events
over server-sent events (monotone event ids, no gaps), and accept chat posts
that reach the environment before the agent's next action.

Endpoints:
    GET  /api/studies
    GET  /api/studies/{study_id}/episodes
    GET  /api/episodes/{episode_id}                 episode detail
    GET  /api/episodes/{episode_id}/steps/{n}       persisted step record view
    GET  /api/episodes/{episode_id}/replay          replay report with diffs
    POST /api/live                                  {task_id, seed?, agent?, max_steps?, step_delay_ms?}
    GET  /api/live/{session_id}                     session view
    GET  /api/live/{session_id}/events              SSE stream
    POST /api/live/{session_id}/chat                {text}

Episode ids are "{study_id}/{agent_index}:{task_id}:{seed}:{attempt}".
"""

from __future__ import annotations

import json
import re
import threading
import time
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from queue import Empty, Queue

from .agents import GenericAgentArgs, OracleModelArgs, RandomModelArgs
from .chat import goal_text
from .env import EnvConfig, make_env
from .errors import ConfigurationError
from .study import EpisodeSpec, Study, parse_episode_id, read_steps
from .study.replay import replay_episode
from .tasks import ensure_synthetic_registered, ensure_wide_registered, get_task_spec

LIVE_AGENTS = {
    "oracle": lambda: GenericAgentArgs(agent_name="generic-oracle", model=OracleModelArgs()),
    "random": lambda: GenericAgentArgs(agent_name="generic-random", model=RandomModelArgs()),
}


class StudyIndex:
    """Studies under the served root: either one study directory or a
    directory of study directories."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def study_ids(self) -> list[str]:
        if (self.root / "study.json").exists():
            return [json.loads((self.root / "study.json").read_text())["id"]]
        ids = []
        for child in sorted(self.root.iterdir()) if self.root.exists() else []:
            if (child / "study.json").exists():
                ids.append(json.loads((child / "study.json").read_text())["id"])
        return ids

    def load(self, study_id: str) -> Study | None:
        if (self.root / "study.json").exists():
            study = Study.load(self.root)
            return study if study.id == study_id else None
        for child in sorted(self.root.iterdir()) if self.root.exists() else []:
            if (child / "study.json").exists():
                study = Study.load(child)
                if study.id == study_id:
                    return study
        return None


def study_summary(study: Study) -> dict:
    counts = {"success": 0, "failure": 0, "error": 0, "incomplete": 0}
    for spec in study.base_specs():
        result = study.final_result(spec)
        if result is None:
            _, latest, _ = study.latest_state(spec)
            counts["error" if latest is not None and latest.status == "error" else "incomplete"] += 1
        else:
            counts[result.status] += 1
    return {
        "id": study.id,
        "benchmark": study.benchmark.name,
        "comment": study.comment,
        "agents": [a.agent_name for a in study.agent_args_list],
        "n_episodes": len(study.episodes),
        "status_counts": counts,
        "repro_info": study.repro_info,
    }


def episode_rows(study: Study) -> list[dict]:
    rows = []
    for spec in study.base_specs():
        attempt, result, started = study.latest_state(spec)
        resolved = EpisodeSpec(
            agent_index=spec.agent_index,
            task_id=spec.task_id,
            seed=spec.seed,
            max_steps=spec.max_steps,
            attempt=attempt,
        )
        steps = read_steps(study.episode_dir(resolved) / "steps.jsonl") if started else []
        rows.append(
            {
                "episode_id": f"{study.id}/{resolved.episode_id}",
                "agent": study.agent_name(spec.agent_index),
                "task_id": spec.task_id,
                "seed": spec.seed,
                "attempt": attempt,
                "status": result.status if result is not None else "incomplete",
                "reward": result.reward if result is not None else 0.0,
                "n_steps": result.n_steps if result is not None else len(steps),
            }
        )
    return rows


def step_view(study: Study, spec: EpisodeSpec, index: int) -> dict | None:
    records = read_steps(study.episode_dir(spec) / "steps.jsonl")
    if not 0 <= index < len(records):
        return None
    record = records[index]
    return {
        "study_id": study.id,
        "episode_id": f"{study.id}/{spec.episode_id}",
        "step": record.get("step", index),
        "n_steps": len(records),
        "goal": record.get("obs", {}).get("goal", ""),
        "observation": record.get("obs", {}),
        "action": record.get("action", ""),
        "think": record.get("think", ""),
        "prompt": record.get("prompt", ""),
        "reward": record.get("reward", 0.0),
        "last_action_error": record.get("last_action_error", ""),
        "profiling": {
            "wall_ms": record.get("wall_ms", 0.0),
            "virtual_ms": record.get("virtual_ms", 0.0),
            "tokens": record.get("tokens", {}),
            "stats": record.get("stats", {}),
        },
    }


class LiveSession:
    """One steerable episode. Chat posts land in a mailbox that is drained
    into the environment right before each agent turn."""

    def __init__(
        self,
        session_id: str,
        task_id: str,
        seed: int,
        agent_kind: str,
        max_steps: int,
        step_delay_ms: float,
        persist_dir: Path | None,
    ):
        self.id = session_id
        self.task_id = task_id
        self.seed = seed
        self.status = "starting"
        self.error = ""
        self.step_count = 0
        self.mailbox: Queue[str] = Queue()
        self.events: list[dict] = []
        self._cond = threading.Condition()
        self._step_delay_ms = step_delay_ms
        self._persist_dir = persist_dir
        try:
            agent_args = LIVE_AGENTS[agent_kind]()
        except KeyError:
            raise ConfigurationError(f"unknown live agent {agent_kind!r}; use one of {sorted(LIVE_AGENTS)}")
        spec = get_task_spec(task_id)
        self.env = make_env(
            task_id,
            EnvConfig(task_id=task_id, seed=seed, max_steps=max_steps or spec.default_max_steps),
        )
        self.agent = agent_args.make_agent()
        self._thread = threading.Thread(target=self._run, name=f"live-{session_id}", daemon=True)

    def start(self) -> None:
        self._thread.start()

    def post_chat(self, text: str) -> None:
        if self.status in ("done", "error"):
            raise RuntimeError("session ended")
        self.mailbox.put(text)
        self._emit("chat", {"role": "user", "text": text})

    def chat_transcript(self) -> list[dict]:
        if self.env.episode is None:
            return []
        return [m.to_dict() for m in self.env.episode.chat]

    def view(self) -> dict:
        obs_texts = {}
        if self.env.episode is not None:
            processed = self.agent.obs_preprocessor(self.env._observe())
            obs_texts = processed.to_dict()
        return {
            "session_id": self.id,
            "task_id": self.task_id,
            "seed": self.seed,
            "status": self.status,
            "error": self.error,
            "step_count": self.step_count,
            "chat": self.chat_transcript(),
            "observation": obs_texts,
        }

    def _emit(self, event: str, data: dict) -> None:
        with self._cond:
            self.events.append({"id": len(self.events), "event": event, "data": data})
            self._cond.notify_all()

    def wait_events(self, after: int, timeout: float = 10.0) -> list[dict]:
        deadline = time.monotonic() + timeout
        with self._cond:
            while len(self.events) <= after:
                remaining = deadline - time.monotonic()
                if remaining <= 0 or self.status in ("done", "error"):
                    break
                self._cond.wait(timeout=remaining)
            return self.events[after:]

    def _drain_mailbox(self) -> None:
        while True:
            try:
                text = self.mailbox.get_nowait()
            except Empty:
                return
            self.env.send_user_message(text)

    def _run(self) -> None:
        steps_file = None
        try:
            if self._persist_dir is not None:
                self._persist_dir.mkdir(parents=True, exist_ok=True)
                steps_file = (self._persist_dir / "steps.jsonl").open("a")
            obs, _ = self.env.reset(self.seed)
            self.status = "running"
            self._emit("status", {"status": "running", "goal": goal_text(self.env.goal_object)})
            while True:
                if self._step_delay_ms:
                    time.sleep(self._step_delay_ms / 1000.0)
                self._drain_mailbox()
                processed = self.agent.obs_preprocessor(obs)
                action_text, info = self.agent.get_action(processed)
                if action_text is None:
                    self.status = "error"
                    self.error = "agent failed to produce a parsable answer"
                    break
                result = self.env.step(action_text)
                self.step_count += 1
                record = {
                    "step": self.step_count - 1,
                    "action": action_text,
                    "think": info.think,
                    "prompt": info.chat_messages[0]["content"] if info.chat_messages else "",
                    "obs": processed.to_dict(),
                    "reward": result.reward,
                    "terminated": result.terminated,
                    "truncated": result.truncated,
                    "last_action_error": result.observation.last_action_error,
                }
                if steps_file is not None:
                    steps_file.write(json.dumps(record) + "\n")
                    steps_file.flush()
                self._emit("step", record)
                obs = result.observation
                if result.terminated or result.truncated:
                    break
            if self.status != "error":
                self.status = "done"
        except Exception as exc:  # surfaced through the session view
            self.status = "error"
            self.error = str(exc)
        finally:
            if steps_file is not None:
                steps_file.close()
            self._emit("status", {"status": self.status, "error": self.error})
            with self._cond:
                self._cond.notify_all()


class ApiServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, root: str | Path):
        super().__init__(address, ApiHandler)
        ensure_synthetic_registered()
        ensure_wide_registered()
        self.index = StudyIndex(root)
        self.sessions: dict[str, LiveSession] = {}
        self.live_dir = Path(root) / "live"


_ROUTES = [
    ("GET", re.compile(r"^/api/studies$"), "studies"),
    ("GET", re.compile(r"^/api/studies/(?P<study_id>[^/]+)/episodes$"), "episodes"),
    ("GET", re.compile(r"^/api/episodes/(?P<eid>.+)/steps/(?P<n>\d+)$"), "step"),
    ("GET", re.compile(r"^/api/episodes/(?P<eid>.+)/replay$"), "replay"),
    ("GET", re.compile(r"^/api/episodes/(?P<eid>.+)$"), "episode"),
    ("POST", re.compile(r"^/api/live$"), "live_start"),
    ("GET", re.compile(r"^/api/live/(?P<sid>[^/]+)/events$"), "live_events"),
    ("POST", re.compile(r"^/api/live/(?P<sid>[^/]+)/chat$"), "live_chat"),
    ("GET", re.compile(r"^/api/live/(?P<sid>[^/]+)$"), "live_view"),
]


class ApiHandler(BaseHTTPRequestHandler):
    server: ApiServer

    def log_message(self, fmt, *args):  # quiet by default
        pass

    # -- plumbing -----------------------------------------------------------

    def _json(self, code: int, payload) -> None:
        body = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _not_found(self, what: str) -> None:
        self._json(404, {"error": f"{what} not found"})

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        if length == 0:
            return {}
        return json.loads(self.rfile.read(length).decode())

    def _dispatch(self, method: str) -> None:
        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            match = pattern.match(self.path)
            if match:
                try:
                    getattr(self, f"_handle_{name}")(**match.groupdict())
                except (BrokenPipeError, ConnectionResetError):
                    pass
                except ConfigurationError as exc:
                    self._json(400, {"error": str(exc)})
                except Exception as exc:
                    self._json(500, {"error": str(exc)})
                return
        self._not_found("route")

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    # -- trace endpoints ------------------------------------------------------

    def _handle_studies(self) -> None:
        summaries = []
        for study_id in self.server.index.study_ids():
            study = self.server.index.load(study_id)
            if study is not None:
                summaries.append(study_summary(study))
        self._json(200, summaries)

    def _handle_episodes(self, study_id: str) -> None:
        study = self.server.index.load(study_id)
        if study is None:
            return self._not_found(f"study {study_id!r}")
        self._json(200, episode_rows(study))

    def _resolve_episode(self, eid: str) -> tuple[Study, EpisodeSpec] | None:
        if "/" not in eid:
            return None
        study_id, local = eid.split("/", 1)
        study = self.server.index.load(study_id)
        if study is None:
            return None
        try:
            agent_index, task_id, seed, attempt = parse_episode_id(local)
        except ConfigurationError:
            return None
        for spec in study.base_specs(agent_index):
            if spec.task_id == task_id and spec.seed == seed:
                return study, EpisodeSpec(
                    agent_index=agent_index,
                    task_id=task_id,
                    seed=seed,
                    max_steps=spec.max_steps,
                    attempt=attempt,
                )
        return None

    def _handle_episode(self, eid: str) -> None:
        resolved = self._resolve_episode(eid)
        if resolved is None:
            return self._not_found(f"episode {eid!r}")
        study, spec = resolved
        records = read_steps(study.episode_dir(spec) / "steps.jsonl")
        _, result, _ = study.latest_state(spec)
        self._json(
            200,
            {
                "episode_id": eid,
                "task_id": spec.task_id,
                "seed": spec.seed,
                "attempt": spec.attempt,
                "agent": study.agent_name(spec.agent_index),
                "status": result.status if result is not None else "incomplete",
                "reward": result.reward if result is not None else 0.0,
                "n_steps": len(records),
            },
        )

    def _handle_step(self, eid: str, n: str) -> None:
        resolved = self._resolve_episode(eid)
        if resolved is None:
            return self._not_found(f"episode {eid!r}")
        study, spec = resolved
        view = step_view(study, spec, int(n))
        if view is None:
            return self._not_found(f"step {n} of episode {eid!r}")
        self._json(200, view)

    def _handle_replay(self, eid: str) -> None:
        resolved = self._resolve_episode(eid)
        if resolved is None:
            return self._not_found(f"episode {eid!r}")
        study, spec = resolved
        self._json(200, replay_episode(study, spec).to_dict())

    # -- live endpoints ---------------------------------------------------------

    def _handle_live_start(self) -> None:
        body = self._body()
        task_id = body.get("task_id")
        if not task_id:
            return self._json(400, {"error": "task_id is required"})
        session_id = uuid.uuid4().hex[:12]
        session = LiveSession(
            session_id=session_id,
            task_id=task_id,
            seed=int(body.get("seed", 0)),
            agent_kind=body.get("agent", "oracle"),
            max_steps=int(body.get("max_steps", 0)),
            step_delay_ms=float(body.get("step_delay_ms", 200.0)),
            persist_dir=self.server.live_dir / session_id,
        )
        self.server.sessions[session_id] = session
        session.start()
        self._json(201, {"session_id": session_id})

    def _session(self, sid: str) -> LiveSession | None:
        return self.server.sessions.get(sid)

    def _handle_live_view(self, sid: str) -> None:
        session = self._session(sid)
        if session is None:
            return self._not_found(f"session {sid!r}")
        self._json(200, session.view())

    def _handle_live_chat(self, sid: str) -> None:
        session = self._session(sid)
        if session is None:
            return self._not_found(f"session {sid!r}")
        text = self._body().get("text", "")
        if not text:
            return self._json(400, {"error": "text is required"})
        try:
            session.post_chat(text)
        except RuntimeError:
            return self._json(409, {"error": "session has ended"})
        self._json(202, {"ok": True})

    def _handle_live_events(self, sid: str) -> None:
        session = self._session(sid)
        if session is None:
            return self._not_found(f"session {sid!r}")
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        cursor = 0
        while True:
            events = session.wait_events(cursor, timeout=5.0)
            for event in events:
                chunk = (
                    f"id: {event['id']}\n"
                    f"event: {event['event']}\n"
                    f"data: {json.dumps(event['data'])}\n\n"
                )
                self.wfile.write(chunk.encode())
            self.wfile.flush()
            cursor += len(events)
            if session.status in ("done", "error") and cursor >= len(session.events):
                break


def serve(root: str | Path, host: str = "127.0.0.1", port: int = 8700) -> ApiServer:
    """Start the API server in a background thread; returns the server."""
    server = ApiServer((host, port), root)
    thread = threading.Thread(target=server.serve_forever, name="api-server", daemon=True)
    thread.start()
    return server
