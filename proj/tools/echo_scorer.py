#!/usr/bin/env python3
"""Stub scorer speaking the mindstone line protocol (version 1).

rank returns a constant score; read returns the first whitespace token.

Usage: echo_scorer.py [--score X] [--mode normal|bad-hello|bad-line|exit|silent|error|no-read]
"""

import argparse
import json
import sys


def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def first_token(text):
    start = 0
    while start < len(text) and text[start].isspace():
        start += 1
    end = start
    while end < len(text) and not text[end].isspace():
        end += 1
    if start == end:
        return 0, len(text)
    return start, end


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--score", type=float, default=0.5)
    parser.add_argument(
        "--mode",
        default="normal",
        choices=["normal", "bad-hello", "bad-line", "exit", "silent", "error", "no-read"],
    )
    args = parser.parse_args()

    if args.mode == "exit":
        return 3
    if args.mode == "silent":
        sys.stdin.read()
        return 0
    if args.mode == "bad-hello":
        sys.stdout.write("this is not json\n")
        sys.stdout.flush()
        sys.stdin.read()
        return 0

    roles = ["rank"] if args.mode == "no-read" else ["rank", "read"]
    emit({"type": "hello", "protocol": 1, "roles": roles})
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        rid = req.get("id", "")
        if args.mode == "bad-line":
            sys.stdout.write("{broken response\n")
            sys.stdout.flush()
        elif args.mode == "error":
            emit({"type": "error", "id": rid, "message": "stub failure"})
        elif req.get("type") == "rank":
            emit({"type": "rank_result", "id": rid, "score": args.score})
        elif req.get("type") == "read":
            start, end = first_token(req.get("text", ""))
            emit({"type": "read_result", "id": rid,
                  "spans": [{"start": start, "end": end, "score": args.score}]})
        else:
            emit({"type": "error", "id": rid, "message": "unknown request"})
    return 0


if __name__ == "__main__":
    sys.exit(main())
