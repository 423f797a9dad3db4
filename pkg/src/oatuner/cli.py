"""Command line front door: simulate, serve, analyze, replay."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .session import Session
from .users import simulate_cohort

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oatuner",
        description="Preference tuning for robot-to-human handovers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a synthetic cohort end to end")
    sim.add_argument("--users", type=int, default=30)
    sim.add_argument("--seed", type=int, default=42)
    sim.add_argument("--config", help="JSON file with (partial) session config")
    sim.add_argument("--noise-temp", type=float, default=0.02,
                     help="choice temperature for the synthetic users")
    sim.add_argument("--out", default="cohort_out",
                     help="output directory for cohort and session files")
    sim.add_argument("--sessions", action="store_true",
                     help="also write each user's full session document")

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--data-dir", default="sessions")

    analyze = sub.add_parser("analyze", help="print the report for a saved session")
    analyze.add_argument("session_file")

    replay = sub.add_parser("replay", help="re-run a saved session and byte-compare")
    replay.add_argument("session_file")

    return parser


def _canon(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def cmd_simulate(args) -> int:
    config = None
    if args.config:
        from .service import config_from_partial_doc

        with open(args.config) as fh:
            config = config_from_partial_doc(json.load(fh))
    results = simulate_cohort(
        args.users, args.seed, config=config, temperature=args.noise_temp
    )
    os.makedirs(args.out, exist_ok=True)
    cohort_path = os.path.join(args.out, "cohort.json")
    with open(cohort_path, "w") as fh:
        json.dump(results.as_doc(include_sessions=False), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written = [cohort_path]
    if args.sessions:
        sess_dir = os.path.join(args.out, "sessions")
        os.makedirs(sess_dir, exist_ok=True)
        for user in results.users:
            path = os.path.join(sess_dir, f"{user.session_doc['session_id']}.json")
            with open(path, "w") as fh:
                json.dump(user.session_doc, fh, indent=2, sort_keys=True)
                fh.write("\n")
            written.append(path)
    agg = results.aggregates
    comp = agg["comparisons"]["per_user"]
    hand = agg["handovers"]["per_user"]
    print(f"users: {agg['n_users']}  seed: {agg['seed']}")
    print(f"comparisons per user: {comp['mean']:.2f} ± {comp['sd']:.2f}")
    print(f"handovers per user: {hand['mean']:.2f} ± {hand['sd']:.2f}")
    print(f"handover success rate: {agg['handovers']['success_rate']:.4f}")
    print(f"evaluation accuracy: {agg['evaluation']['accuracy']['mean']:.3f}")
    print(f"wrote {len(written)} file(s) under {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(args.data_dir), host=args.host, port=args.port)
    return 0


def _load_doc(path):
    with open(path) as fh:
        return json.load(fh)


def cmd_analyze(args) -> int:
    doc = _load_doc(args.session_file)
    session = Session.from_doc(doc)
    print(json.dumps(session.report(), indent=2, sort_keys=True))
    return 0


def cmd_replay(args) -> int:
    doc = _load_doc(args.session_file)
    session = Session.from_doc(doc)
    fresh = session.as_doc()
    checks = {
        "transcript": _canon(doc["transcript"]) == _canon(fresh["transcript"]),
        "handovers": _canon(doc["handovers"]) == _canon(fresh["handovers"]),
        "report": _canon(doc["report"]) == _canon(fresh["report"]),
    }
    for name, ok in checks.items():
        print(f"{name}: {'match' if ok else 'MISMATCH'}")
    if all(checks.values()):
        print(f"replay OK: {doc['session_id']}")
        return 0
    print(f"replay FAILED: {doc['session_id']}", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "serve": cmd_serve,
        "analyze": cmd_analyze,
        "replay": cmd_replay,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
