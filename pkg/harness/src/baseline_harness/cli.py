"""CLI: run scikit-learn baselines on exported CSVs and compare metric JSONs.

Exit codes: 0 success/parity pass, 1 parity fail, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (
    HarnessSchemaError,
    compare_reports,
    format_delta_table,
    load_report,
    run_baselines,
    validate_report,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdm-baselines",
        description="Reference-library baselines and parity checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train baselines, emit metrics JSON per model")
    p.add_argument("--train", required=True, metavar="CSV")
    p.add_argument("--test", required=True, metavar="CSV")
    p.add_argument("--model", choices=("rf", "gbt", "both"), default="both")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=None,
                   help="default 10 for rf, 3 for gbt")
    p.add_argument("--min-samples-split", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--species", default="unspecified")
    p.add_argument("--split", default="test")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="delta table for two metrics JSONs")
    p.add_argument("--primary", required=True, metavar="JSON")
    p.add_argument("--baseline", required=True, metavar="JSON")
    p.add_argument("--tolerance", type=float, default=0.07)
    p.add_argument("--out", default=None, metavar="JSON",
                   help="also write the comparison as JSON")
    p.set_defaults(func=cmd_compare)

    return parser


def cmd_run(args) -> int:
    models = ("rf", "gbt") if args.model == "both" else (args.model,)
    reports = run_baselines(
        args.train, args.test, models=models, trees=args.trees,
        max_depth=args.max_depth, min_samples_split=args.min_samples_split,
        eta=args.eta, theta=args.theta, seed=args.seed,
        species=args.species, split=args.split)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, report in reports.items():
        validate_report(report, f"sk-{name}")
        path = out_dir / f"sk_{name}_metrics.json"
        path.write_text(json.dumps(report, indent=2) + "\n")
        print(f"{path}: accuracy {report['accuracy']:.4f} "
              f"auc {report['auc']:.4f}")
    return 0


def cmd_compare(args) -> int:
    comparison = compare_reports(load_report(args.primary),
                                 load_report(args.baseline),
                                 tolerance=args.tolerance)
    print(format_delta_table(comparison))
    if args.out:
        Path(args.out).write_text(json.dumps(comparison, indent=2) + "\n")
    return 0 if comparison["passed"] else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HarnessSchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
