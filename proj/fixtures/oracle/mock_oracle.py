#!/usr/bin/env python3
"""Mock external oracle speaking the line-delimited JSON protocol.

Reads one JSON request per line on stdin ({"function_name", "body",
"params"}) and answers one JSON line on stdout ({"score",
"predicted_cwes"}). Behaviour is selected on the command line so tests can
exercise the happy path and every failure mode.

Modes:
  canned   (default) -- always answer --score / --cwe
  favor    -- score 1.0 for --name, 0.0 for everything else
  die      -- exit immediately without reading anything
  garbage  -- answer a line that is not JSON
  silent   -- read requests but never answer (forces a client timeout)
"""
import argparse
import json
import sys


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--mode", default="canned")
    ap.add_argument("--score", type=float, default=0.9)
    ap.add_argument("--cwe", action="append", default=None)
    ap.add_argument("--name", default="")
    args = ap.parse_args()

    if args.mode == "die":
        return 3

    cwes = args.cwe if args.cwe is not None else ["CWE-415"]
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        if args.mode == "garbage":
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        if args.mode == "silent":
            continue
        req = json.loads(line)
        if args.mode == "favor":
            score = 1.0 if req.get("function_name") == args.name else 0.0
            reply = {"score": score, "predicted_cwes": cwes if score > 0 else []}
        else:
            reply = {"score": args.score, "predicted_cwes": cwes}
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
