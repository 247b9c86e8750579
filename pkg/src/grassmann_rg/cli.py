"""grassmann-rg command line: run one vector-model experiment and write a JSON report.

Exit codes: 0 all verdicts PASS, 1 some verdict FAIL, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import sys

from .vm import COMMANDS, ConfigError, ExperimentConfig, all_pass, dumps, run


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="grassmann-rg", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON experiment config (defaults apply when omitted)")
    p.add_argument("--out", help="report path; stdout when omitted")
    p.add_argument("--mode", choices=("exact", "float"))
    p.add_argument("--seed", type=int)
    p.add_argument("--rmax", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--csv", help="also write the check table as CSV")
    return p


def _write_csv(path: str, report: dict):
    rows = list(report.get("checks", [])) + list(report.get("scaling", {}).get("checks", []))
    cols = sorted({k for r in rows for k in r if not isinstance(r[k], (dict, list))})
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
        overrides = {"mode": args.mode, "seed": args.seed, "r_max": args.rmax, "tol": args.tol}
        for key, val in overrides.items():
            if val is not None:
                setattr(cfg, key, val)
        cfg.validate()
        report = run(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    text = dumps(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv:
        _write_csv(args.csv, report)
    return 0 if all_pass(report) else 1


if __name__ == "__main__":
    sys.exit(main())
