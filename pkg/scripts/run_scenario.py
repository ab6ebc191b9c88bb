#!/usr/bin/env python3
"""Run one of the scripted demo scenarios against mock backends.

Writes rendered frames plus a session bundle into the output directory, and
prints the per-step history so the composition flow is inspectable:

    python scripts/run_scenario.py brainstorming --out out/brainstorming
    python scripts/run_scenario.py all --out out/
"""

import argparse
import sys
from pathlib import Path

from scenemeld.scenarios import SCENARIOS
from scenemeld.service.config import EngineConfig
from scenemeld.service.engine import Engine


def run_one(name: str, out_root: Path) -> None:
    engine = Engine(EngineConfig(synthesize_segments=True))
    out_dir = out_root / name
    summary = SCENARIOS[name](engine, out_dir=out_dir)
    engine.export_session(summary["session_id"], out_dir / "bundle")
    print(f"== {name} (session {summary['session_id']}, revision {summary['revision']})")
    for i, (label, digest) in enumerate(zip(summary["labels"], summary["history_digests"])):
        print(f"  [{i:02d}] {label:<28} {digest[:12]}")
    print(f"  outputs: {out_dir}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("scenario", choices=[*SCENARIOS, "all"])
    parser.add_argument("--out", default="out", help="output directory root")
    args = parser.parse_args(argv)

    names = list(SCENARIOS) if args.scenario == "all" else [args.scenario]
    for name in names:
        run_one(name, Path(args.out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
