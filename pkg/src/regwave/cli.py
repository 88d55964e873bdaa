"""Command line entry point: ``regwave run|list|check``."""

from __future__ import annotations

import argparse
import sys

from regwave.errors import RegwaveError
from regwave.harness import ArtifactIOError, ConfigError, RunConfig, UnknownExperimentError, run

EXIT_PASS = 0
EXIT_METRIC_FAIL = 1
EXIT_CONFIG = 2
EXIT_UNKNOWN = 3
EXIT_IO = 4
EXIT_RUNTIME = 5


def _print_report(report, run_dir=None):
    for m in report.metrics:
        print(f"  {m.describe()}")
    status = "PASS" if report.passed else "FAIL"
    print(f"{report.name}: {status} ({report.runtime:.1f}s, config {report.config_hash[:12]})")
    if run_dir is not None:
        print(f"artifacts: {run_dir}")


def _run(config, out=None):
    report, run_dir = run(config, out)
    _print_report(report, run_dir)
    return EXIT_PASS if report.passed else EXIT_METRIC_FAIL


def main(argv=None):
    parser = argparse.ArgumentParser(prog="regwave", description="Edge statistics of random regular graphs.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="override the config's out-dir")
    sub.add_parser("list", help="list registered experiments")
    p_check = sub.add_parser("check", help="run the machine-precision identity suite")
    p_check.add_argument("--out", default="out")
    p_check.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        if args.command == "list":
            from regwave.experiments import list_experiments

            for name, desc, anchor in list_experiments():
                print(f"{name:22s} {desc} [{anchor}]")
            return EXIT_PASS
        if args.command == "check":
            kw = {"experiment": "identity-suite", "out-dir": args.out}
            if args.seed is not None:
                kw["seed"] = args.seed
            return _run(RunConfig.from_dict(kw))
        return _run(RunConfig.load(args.config), args.out)
    except UnknownExperimentError as exc:
        print(f"unknown experiment: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except ArtifactIOError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, TypeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
