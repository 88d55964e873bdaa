"""Run every config in scripts/configs (or the ones named) and print a summary.

    python3 scripts/run_all.py                      # all configs
    python3 scripts/run_all.py rigidity tw1_edge    # selected
    REGWAVE_WORKERS=4 python3 scripts/run_all.py    # pooled ensembles
"""

import argparse
import sys
from pathlib import Path

from regwave.harness import RunConfig, run

HERE = Path(__file__).resolve().parent


def main():
    p = argparse.ArgumentParser()
    p.add_argument("names", nargs="*")
    p.add_argument("--out", default="out")
    args = p.parse_args()
    paths = sorted((HERE / "configs").glob("*.json"))
    if args.names:
        paths = [HERE / "configs" / f"{n}.json" for n in args.names]
    failed = []
    for path in paths:
        cfg = RunConfig.load(path)
        report, run_dir = run(cfg, args.out)
        print(f"{'PASS' if report.passed else 'FAIL'}  {path.stem:22s} {report.runtime:7.1f}s  {run_dir}")
        for m in report.metrics:
            print(f"      {m.describe()}")
        if not report.passed:
            failed.append(path.stem)
    print(f"\n{len(paths) - len(failed)}/{len(paths)} passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
