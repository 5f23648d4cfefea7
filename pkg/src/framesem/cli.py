"""Command-line client.

The CLI is a thin client of the HTTP service: with --server it talks to a
running instance, otherwise it spins the service up in-process and speaks to
it over the same request/response surface.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_PROCESSING = 1
EXIT_USAGE = 2


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    suppress = dict(default=argparse.SUPPRESS)
    common.add_argument("--kb", metavar="DIR", help="knowledge-base directory", **suppress)
    common.add_argument("--memory", metavar="FILE", help="episodic memory file", **suppress)
    common.add_argument("--server", metavar="URL", help="talk to a running service", **suppress)
    common.add_argument(
        "--explain", action="store_true", help="emit the processing trace", **suppress
    )
    common.add_argument(
        "--json-trace", action="store_true", help="machine-readable trace records", **suppress
    )
    common.add_argument(
        "--save-memory",
        metavar="FILE",
        help="write the episodic store after the command",
        **suppress,
    )

    parser = argparse.ArgumentParser(
        prog="framesem",
        description="frame-based semantic analysis, generation, and script learning",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="print ranked meaning representations")
    p.add_argument("text")

    p = sub.add_parser("generate", parents=[common], help="realize an MR file as a sentence")
    p.add_argument("mr_file")

    p = sub.add_parser(
        "learn-script", parents=[common], help="learn a script from a scenario file"
    )
    p.add_argument("scenario_file")

    p = sub.add_parser(
        "consolidate", parents=[common], help="consolidate repeated episodes into habits"
    )
    p.add_argument("--min-count", type=int, default=3)

    p = sub.add_parser("plan", parents=[common], help="instantiate a plan from a stored script")
    p.add_argument("script")
    p.add_argument("--for", dest="collaborator", metavar="NAME")
    p.add_argument("--context", default="", help="comma-separated available concepts")

    sub.add_parser("validate", parents=[common], help="lint every loaded knowledge base")

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


class Options:
    """Namespace view with defaults for SUPPRESS-backed shared flags."""

    def __init__(self, args):
        self._args = args

    def __getattr__(self, name):
        defaults = {
            "kb": None,
            "memory": None,
            "server": None,
            "explain": False,
            "json_trace": False,
            "save_memory": None,
        }
        if name in defaults:
            return getattr(self._args, name, defaults[name])
        return getattr(self._args, name)


class Client:
    """One request surface whether in-process or over the network."""

    def __init__(self, args):
        if args.server:
            import httpx

            self._client = httpx.Client(base_url=args.server)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import create_app

            app = create_app(kb_dir=args.kb, memory_path=args.memory)
            self._client = TestClient(app)

    def post(self, path, payload):
        return self._client.post(path, json=payload)

    def get(self, path):
        return self._client.get(path)


def _print_trace(body):
    if body.get("trace_events"):
        for event in body["trace_events"]:
            print(json.dumps(event, sort_keys=True))
    elif body.get("trace"):
        print(body["trace"], end="")


def run(argv=None):
    parser = build_parser()
    args = Options(parser.parse_args(argv))

    if args.command == "serve":
        import uvicorn

        from .service.app import create_app

        uvicorn.run(
            create_app(kb_dir=args.kb, memory_path=args.memory),
            host=args.host,
            port=args.port,
        )
        return EXIT_OK

    try:
        client = Client(args)
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE

    explain = {"explain": args.explain, "json_trace": args.json_trace}
    status = EXIT_OK

    if args.command == "analyze":
        resp = client.post("/analyze", {"text": args.text, **explain})
        if resp.status_code != 200:
            print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
            return EXIT_PROCESSING if resp.status_code == 422 else EXIT_USAGE
        body = resp.json()
        for i, reading in enumerate(body["readings"], start=1):
            marks = []
            if reading["precedent"]:
                marks.append("precedent-based")
            suffix = f" [{', '.join(marks)}]" if marks else ""
            print(f"; reading {i} score {reading['score']:g}{suffix}")
            print(reading["mr"], end="")
        _print_trace(body)
    elif args.command == "generate":
        try:
            mr_text = Path(args.mr_file).read_text()
        except OSError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_USAGE
        resp = client.post("/generate", {"mr": mr_text, **explain})
        if resp.status_code != 200:
            print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
            return EXIT_PROCESSING if resp.status_code == 422 else EXIT_USAGE
        body = resp.json()
        print(body["sentence"])
        _print_trace(body)
    elif args.command == "learn-script":
        try:
            scenario = Path(args.scenario_file).read_text()
        except OSError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_USAGE
        resp = client.post("/learn", {"scenario": scenario, **explain})
        if resp.status_code != 200:
            print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
            return EXIT_PROCESSING if resp.status_code == 422 else EXIT_USAGE
        body = resp.json()
        for qa in body["questions"]:
            answer = qa["answer"] if qa["answer"] is not None else "(no answer)"
            print(f"; Q: {qa['question']}")
            print(f"; A: {answer}")
        if body["script"]:
            print(body["script"], end="")
        print("; modules:")
        for module, state in body["modules"].items():
            print(f";   {module}: {state} ({body['difficulty'].get(module, 'n/a')})")
        if body["describe_back"]:
            print(f"; describe-back: {body['describe_back']}")
        if not body["learned"]:
            open_list = ", ".join(body["open_lacunae"]) or "unspecified"
            print(f"error: not learned (open: {open_list})", file=sys.stderr)
            status = EXIT_PROCESSING
        _print_trace(body)
    elif args.command == "consolidate":
        resp = client.post("/consolidate", {"min_count": args.min_count})
        body = resp.json()
        if not body["habits"]:
            print("; no habits found")
        for habit in body["habits"]:
            print(habit, end="")
    elif args.command == "plan":
        context = [c.strip() for c in args.context.split(",") if c.strip()]
        resp = client.post(
            "/plan",
            {"script": args.script, "collaborator": args.collaborator, "context": context},
        )
        if resp.status_code != 200:
            print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
            return EXIT_PROCESSING if resp.status_code == 422 else EXIT_USAGE
        body = resp.json()
        print(f"; plan for {body['script']} [{body['provenance']}]")
        for i, step in enumerate(body["steps"], start=1):
            print(f"{i}. {step}")
    elif args.command == "validate":
        resp = client.get("/validate")
        body = resp.json()
        if body["issues"]:
            for issue in body["issues"]:
                print(issue)
        else:
            print("; all knowledge bases clean")

    if args.save_memory:
        resp = client.get("/memory")
        Path(args.save_memory).write_text(resp.json()["text"])

    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
