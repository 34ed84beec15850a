"""Command-line interface.

    webgym study new --benchmark synthetic --agent oracle --comment "first run"
    webgym study run <dir> --n-jobs 8
    webgym study relaunch <dir>
    webgym study report <dir>
    webgym study journal <dir> --journal journal.csv
    webgym study replay <dir> [--episode <id>]
    webgym serve <dir> --port 8700

Exit codes: 0 success, 1 episode failures present, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agents import GenericAgentArgs, OracleModelArgs, RandomModelArgs, agent_args_from_dict
from .errors import ConfigurationError
from .study import Study, append_to_journal, make_study, replay_study
from .study.metrics import AggregationError
from .tasks import load_benchmark

EXIT_OK = 0
EXIT_EPISODE_FAILURES = 1
EXIT_CONFIG = 2

_AGENT_SHORTCUTS = {
    "oracle": lambda: GenericAgentArgs(agent_name="generic-oracle", model=OracleModelArgs()),
    "random": lambda: GenericAgentArgs(agent_name="generic-random", model=RandomModelArgs()),
}


def _load_agent_args(ref: str):
    if ref in _AGENT_SHORTCUTS:
        return _AGENT_SHORTCUTS[ref]()
    path = Path(ref)
    if not path.exists():
        raise ConfigurationError(f"agent args file {ref!r} not found (or use one of {sorted(_AGENT_SHORTCUTS)})")
    return agent_args_from_dict(json.loads(path.read_text()))


def _study_exit_code(study: Study) -> int:
    for spec in study.base_specs():
        result = study.final_result(spec)
        if result is None or result.status != "success":
            return EXIT_EPISODE_FAILURES
    return EXIT_OK


def _cmd_study_new(args) -> int:
    benchmark = load_benchmark(args.benchmark)
    agent_args = [_load_agent_args(ref) for ref in args.agent]
    study = make_study(
        benchmark,
        agent_args,
        comment=args.comment,
        root=args.root,
        seeds_per_task=args.seeds,
    )
    print(study.dir)
    return EXIT_OK


def _cmd_study_run(args) -> int:
    study = Study.load(args.dir)
    study.run(n_jobs=args.n_jobs, throttle_ms=args.throttle_ms)
    _print_report(study)
    return _study_exit_code(study)


def _cmd_study_relaunch(args) -> int:
    study = Study.load(args.dir)
    pending = study.find_incomplete(include_errors=True)
    print(f"{len(pending)} episode(s) pending")
    study.run(n_jobs=args.n_jobs)
    _print_report(study)
    return _study_exit_code(study)


def _print_report(study: Study) -> None:
    try:
        aggregates = study.aggregate()
    except AggregationError as exc:
        print(f"no results yet: {exc}")
        return
    usage = study.total_usage()
    print(f"study {study.id}  benchmark={study.benchmark.name}")
    header = f"{'agent':<24} {'n':>5} {'success':>9} {'stderr':>8}"
    print(header)
    print("-" * len(header))
    for agent_name, metrics in aggregates.items():
        print(f"{agent_name:<24} {metrics.n:>5} {metrics.success_rate:>9.3f} {metrics.std_error:>8.4f}")
        for category, sub in metrics.per_category.items():
            print(f"  {category:<22} {sub.n:>5} {sub.success_rate:>9.3f} {sub.std_error:>8.4f}")
    print(f"tokens: prompt={usage.prompt_tokens} completion={usage.completion_tokens} cost={usage.cost:.4f}")


def _cmd_study_report(args) -> int:
    study = Study.load(args.dir)
    _print_report(study)
    return _study_exit_code(study)


def _cmd_study_journal(args) -> int:
    study = Study.load(args.dir)
    rows = append_to_journal(study, args.journal)
    print(f"appended {len(rows)} row(s) to {args.journal}")
    return EXIT_OK


def _cmd_study_replay(args) -> int:
    study = Study.load(args.dir)
    report = replay_study(study, episode_id=args.episode)
    for episode in report.episodes:
        mark = "ok" if episode.verified else f"DIVERGED at step {episode.diverged_at}"
        print(f"{episode.episode_id}: {mark}")
        if not episode.verified:
            for step in episode.steps:
                if not step.clean:
                    if step.prompt_diff:
                        print(step.prompt_diff)
                    if step.obs_diff:
                        print(step.obs_diff)
                    if step.outcome_mismatch:
                        print(step.outcome_mismatch)
    print(f"replay {'verified' if report.verified else 'FAILED'} over {len(report.episodes)} episode(s)")
    return EXIT_OK if report.verified else EXIT_EPISODE_FAILURES


def _cmd_serve(args) -> int:
    from .server import ApiServer

    server = ApiServer((args.host, args.port), args.dir)
    host, port = server.server_address[:2]
    print(f"listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="webgym")
    sub = parser.add_subparsers(dest="command", required=True)

    study = sub.add_parser("study", help="create, run, and inspect studies")
    study_sub = study.add_subparsers(dest="study_command", required=True)

    new = study_sub.add_parser("new", help="materialize a study directory")
    new.add_argument("--benchmark", required=True, help="built-in name or manifest path")
    new.add_argument("--agent", action="append", required=True, help="agent args JSON file, or 'oracle'/'random'")
    new.add_argument("--comment", default="")
    new.add_argument("--root", default="studies")
    new.add_argument("--seeds", type=int, default=None, help="seeds per task (default: benchmark suggestion)")
    new.set_defaults(fn=_cmd_study_new)

    run = study_sub.add_parser("run", help="execute pending episodes")
    run.add_argument("dir")
    run.add_argument("--n-jobs", type=int, default=1)
    run.add_argument("--throttle-ms", type=float, default=0.0, help=argparse.SUPPRESS)
    run.set_defaults(fn=_cmd_study_run)

    relaunch = study_sub.add_parser("relaunch", help="resume incomplete/errored episodes")
    relaunch.add_argument("dir")
    relaunch.add_argument("--n-jobs", type=int, default=1)
    relaunch.set_defaults(fn=_cmd_study_relaunch)

    report = study_sub.add_parser("report", help="print the metrics table")
    report.add_argument("dir")
    report.set_defaults(fn=_cmd_study_report)

    journal = study_sub.add_parser("journal", help="append aggregates to the reproducibility journal")
    journal.add_argument("dir")
    journal.add_argument("--journal", required=True)
    journal.set_defaults(fn=_cmd_study_journal)

    replay = study_sub.add_parser("replay", help="re-execute recorded actions and diff prompts")
    replay.add_argument("dir")
    replay.add_argument("--episode", default=None, help="agent:task:seed:attempt (default: all)")
    replay.set_defaults(fn=_cmd_study_replay)

    serve = sub.add_parser("serve", help="host the trace/live HTTP API")
    serve.add_argument("dir")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8700)
    serve.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
