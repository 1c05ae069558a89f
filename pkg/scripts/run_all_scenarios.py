#!/usr/bin/env python3
"""Run every bundled scenario and print a one-line verdict per check.

    python scripts/run_all_scenarios.py [--report-dir reports/]
"""

import argparse
import sys
from pathlib import Path

from cdlab.cli import bundled_scenario_dir
from cdlab.scenarios import run_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--report-dir", type=Path, default=None)
    args = parser.parse_args()

    overall = True
    for path in sorted(bundled_scenario_dir().glob("*.json")):
        result = run_scenario(path)
        overall &= result.overall
        print(result.summary())
        if args.report_dir is not None:
            args.report_dir.mkdir(parents=True, exist_ok=True)
            out = args.report_dir / f"{path.stem}-report.json"
            out.write_text(result.to_json() + "\n", encoding="utf-8")
            print(f"  report -> {out}")
    sys.exit(0 if overall else 1)


if __name__ == "__main__":
    main()
