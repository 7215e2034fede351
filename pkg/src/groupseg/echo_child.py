"""Reference child process for the external predictor protocol.

Reads one JSON request per line from stdin and replies with the sum of each
window's entries. The other modes misbehave on purpose for conformance tests.

    python -m groupseg.echo_child [--mode sum|malformed|wrong-id|hang|exit-once]
"""

import argparse
import json
import os
import sys
import time


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--mode", default="sum",
                    choices=["sum", "malformed", "wrong-id", "hang", "exit-once"])
    ap.add_argument("--marker", default=None,
                    help="file used by exit-once to remember that it already exited")
    args = ap.parse_args(argv)

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        if args.mode == "hang":
            time.sleep(3600)
        if args.mode == "exit-once" and args.marker and not os.path.exists(args.marker):
            open(args.marker, "w").close()
            sys.exit(3)
        outputs = [sum(sum(row) for row in w) for w in msg["windows"]]
        if args.mode == "malformed":
            sys.stdout.write("this is not json\n")
        else:
            rid = msg["id"] + 1 if args.mode == "wrong-id" else msg["id"]
            sys.stdout.write(json.dumps({"id": rid, "outputs": outputs}) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
