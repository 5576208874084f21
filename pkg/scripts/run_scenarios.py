"""Run every scenario in configs/ through the CLI and collect the CSVs in results/.

    python scripts/run_scenarios.py [--out results] [--threads 1] [--only decay]
"""

import argparse
import sys
import time
from pathlib import Path

from motionconv.cli import main

ROOT = Path(__file__).resolve().parent.parent

# config file prefix -> subcommand
SUBCOMMAND = {
    "decay": "decay-scan",
    "radon": "radon-apply",
    "improving": "improving-scan",
    "sharpness": "sharpness",
    "plancherel": "plancherel",
    "opnorm": "opnorm-scan",
    "bench": "bench",
}


def main_(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--threads", default="1")
    ap.add_argument("--only", help="run configs whose name starts with this")
    args = ap.parse_args(argv)
    failures = 0
    for cfg in sorted((ROOT / "configs").glob("*.cfg")):
        if args.only and not cfg.stem.startswith(args.only):
            continue
        cmd = SUBCOMMAND[cfg.stem.split("_")[0]]
        t0 = time.perf_counter()
        status = main([cmd, "--config", str(cfg), "--out", args.out, "--threads", args.threads])
        print(f"  {cfg.name:28s} {cmd:15s} exit {status}  {time.perf_counter() - t0:6.1f} s", file=sys.stderr)
        failures += status != 0
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main_())
