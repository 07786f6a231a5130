"""Command-line front end: every pipeline stage as a subcommand.

Exit codes: 0 success, 2 usage/config error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .ensemble import (
    GradientBoosting,
    RandomForest,
    feature_importance,
    load_model,
    model_to_dict,
    save_model,
)
from .errors import DataError, ParseError, SchemaError
from .geo import BoundingBox, parse_ascii_grid
from .mapping import predict_grid, write_grid_csv, write_heatmap_pgm
from .metrics import classification_report, report_to_dict
from .pipeline import (
    FEATURE_NAMES,
    RASTER_NAMES,
    assemble_dataset,
    balanced_sample,
    generate_pseudo_absences,
    parse_observations_csv,
    presence_bounding_box,
    read_dataset_csv,
    split_dataset,
    synthetic_clusters,
    write_dataset_csv,
)

logger = logging.getLogger(__name__)

THETA_SWEEP = [round(0.05 * k, 2) for k in range(1, 20)]


def _max_features_arg(value: str):
    if value in ("sqrt", "all"):
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"max-features must be an int, 'sqrt', or 'all', got {value!r}")


def _add_raster_args(p: argparse.ArgumentParser) -> None:
    for name in RASTER_NAMES:
        p.add_argument(f"--{name}", required=True, metavar="ASC",
                       help=f"{name} raster (.asc ESRI ASCII grid)")


def _add_region_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--region", nargs=4, type=float, default=None,
                   metavar=("MIN_LAT", "MIN_LON", "MAX_LAT", "MAX_LON"),
                   help="pseudo-absence sampling region; default is the "
                        "presence bounding box expanded by --margin")
    p.add_argument("--margin", type=float, default=0.5,
                   help="degrees added per side to the default region")
    p.add_argument("--min-dist-km", type=float, default=1.1,
                   help="exclusion radius around presences (km)")
    p.add_argument("--absence-factor", type=float, default=1.5,
                   help="pseudo-absences generated per requested class sample")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdmkit",
        description="Species distribution modeling with tree ensembles on "
                    "climate rasters")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="observations + rasters -> train/val/test CSVs")
    p.add_argument("--observations", required=True, metavar="CSV")
    p.add_argument("--species", default=None,
                   help="species to select; defaults to the file's only species")
    _add_raster_args(p)
    _add_region_args(p)
    p.add_argument("--n-per-class", type=int, default=250)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a model on a train CSV, report on val")
    p.add_argument("--train", required=True, metavar="CSV")
    p.add_argument("--val", required=True, metavar="CSV")
    p.add_argument("--model", required=True, choices=("rf", "gbt"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=None,
                   help="default 10 for rf, 3 for gbt")
    p.add_argument("--min-samples-split", type=int, default=2)
    p.add_argument("--max-features", type=_max_features_arg, default=None,
                   help="default sqrt for rf, all for gbt")
    p.add_argument("--eta", type=float, default=0.1, help="gbt learning rate")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--jobs", type=int, default=1, help="rf training workers")
    p.add_argument("--sweep-theta", action="store_true",
                   help="also report the validation-accuracy-best threshold")
    p.add_argument("--out", required=True, metavar="MODEL_JSON")
    p.add_argument("--json", action="store_true", dest="as_json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a dataset CSV with a saved model")
    p.add_argument("--model", required=True, metavar="MODEL_JSON")
    p.add_argument("--data", required=True, metavar="CSV")
    p.add_argument("--theta", type=float, default=None,
                   help="default: the threshold stored in the model file")
    p.add_argument("--species", default="unspecified")
    p.add_argument("--split", default="test")
    p.add_argument("--out", default=None, metavar="METRICS_JSON")
    p.add_argument("--json", action="store_true", dest="as_json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("importance", help="feature-importance JSON + SVG chart")
    p.add_argument("--model", required=True, metavar="MODEL_JSON")
    p.add_argument("--out", required=True, metavar="JSON")
    p.add_argument("--svg", default=None, metavar="SVG")
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("map", help="predicted distribution map (CSV + PGM)")
    p.add_argument("--model", required=True, metavar="MODEL_JSON")
    _add_raster_args(p)
    p.add_argument("--bbox", nargs=4, type=float, required=True,
                   metavar=("MIN_LAT", "MIN_LON", "MAX_LAT", "MAX_LON"))
    p.add_argument("--step", type=float, default=0.05, help="cell size in degrees")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-pgm", required=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("synth", help="synthetic two-cluster dataset CSVs")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--separation", type=float, default=4.0,
                   help="distance between class means in per-feature std devs")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export-dataset",
                       help="observations + rasters -> one dataset CSV (no split)")
    p.add_argument("--observations", required=True, metavar="CSV")
    p.add_argument("--species", default=None)
    _add_raster_args(p)
    _add_region_args(p)
    p.add_argument("--n-per-class", type=int, default=250)
    p.add_argument("--no-balance", action="store_true",
                   help="export every surviving sample instead of balancing")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, metavar="CSV")
    p.set_defaults(func=cmd_export_dataset)

    return parser


def _load_rasters(args) -> dict:
    rasters = {}
    for name in RASTER_NAMES:
        path = getattr(args, name)
        with open(path) as fh:
            try:
                rasters[name] = parse_ascii_grid(fh.read())
            except ParseError as exc:
                raise ParseError(f"{path}: {exc}") from None
    return rasters


def _select_species(records, species):
    present = sorted({r.species for r in records})
    if species is None:
        if len(present) != 1:
            raise SchemaError(
                f"observations contain {len(present)} species {present}; "
                f"pick one with --species")
        species = present[0]
    selected = [r for r in records if r.species == species]
    if not selected:
        raise DataError(f"no observations for species {species!r} "
                        f"(file has {present})")
    return species, selected


def _assemble_balanced(args):
    with open(args.observations) as fh:
        records = parse_observations_csv(fh.read())
    species, selected = _select_species(records, args.species)
    points = [r.point for r in selected]
    if args.region is not None:
        min_lat, min_lon, max_lat, max_lon = args.region
        region = BoundingBox(min_lat=min_lat, max_lat=max_lat,
                             min_lon=min_lon, max_lon=max_lon)
    else:
        region = presence_bounding_box(points, margin=args.margin)
    n_absences = int(round(args.absence_factor * args.n_per_class))
    absences = generate_pseudo_absences(points, region, n_absences,
                                        min_dist_km=args.min_dist_km,
                                        seed=args.seed)
    rasters = _load_rasters(args)
    dataset = assemble_dataset(selected, absences, rasters)
    logger.info("assembled %d samples for %s", len(dataset), species)
    return dataset


def cmd_ingest(args) -> int:
    dataset = _assemble_balanced(args)
    balanced = balanced_sample(dataset, n_per_class=args.n_per_class,
                               seed=args.seed)
    splits = split_dataset(balanced, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", splits.train), ("val", splits.val),
                       ("test", splits.test)):
        rows = write_dataset_csv(part, out_dir / f"{name}.csv")
        print(f"{name}.csv: {rows} rows")
    return 0


def _build_model(args):
    if args.model == "rf":
        return RandomForest(
            n_trees=args.trees,
            max_depth=args.max_depth if args.max_depth is not None else 10,
            min_samples_split=args.min_samples_split,
            max_features=args.max_features if args.max_features is not None else "sqrt",
            theta=args.theta,
            random_state=args.seed,
            n_jobs=args.jobs,
        )
    return GradientBoosting(
        n_trees=args.trees,
        eta=args.eta,
        max_depth=args.max_depth if args.max_depth is not None else 3,
        min_samples_split=args.min_samples_split,
        max_features=args.max_features if args.max_features is not None else "all",
        theta=args.theta,
        random_state=args.seed,
    )


def _emit_report(report_dict: dict, as_json: bool, out: str | None) -> None:
    text = json.dumps(report_dict, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    if as_json:
        print(text)
    else:
        cm = report_dict["confusion"]
        print(f"{report_dict['model']} on {report_dict['split']} "
              f"({report_dict['species']}):")
        for key in ("accuracy", "precision", "recall", "f1", "auc"):
            print(f"  {key:<9} {report_dict[key]:.4f}")
        print(f"  confusion tp={cm['tp']} fp={cm['fp']} fn={cm['fn']} tn={cm['tn']}")
        if report_dict["degenerate"]:
            print(f"  degenerate: {', '.join(report_dict['degenerate'])}")


def cmd_train(args) -> int:
    train_ds = read_dataset_csv(args.train)
    val_ds = read_dataset_csv(args.val)
    model = _build_model(args)
    model.fit(train_ds.X, train_ds.y, feature_names=train_ds.feature_names)
    save_model(model, args.out)

    probs = model.predict_proba(val_ds.X)[:, 1]
    report = classification_report(val_ds.y, probs, theta=args.theta)
    _emit_report(report_to_dict(report, species=train_ds.species or "unspecified",
                                model=args.model, split="val"),
                 args.as_json, out=None)
    if args.sweep_theta:
        best_theta, best_acc = args.theta, report.accuracy
        for theta in THETA_SWEEP:
            acc = classification_report(val_ds.y, probs, theta=theta).accuracy
            if acc > best_acc:
                best_theta, best_acc = theta, acc
        print(f"theta sweep: best validation accuracy {best_acc:.4f} "
              f"at theta={best_theta}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    dataset = read_dataset_csv(args.data)
    if tuple(model.feature_names_) != tuple(dataset.feature_names):
        raise SchemaError(
            f"model features {list(model.feature_names_)} do not match "
            f"dataset columns {list(dataset.feature_names)}")
    theta = args.theta if args.theta is not None else model.theta
    probs = model.predict_proba(dataset.X)[:, 1]
    report = classification_report(dataset.y, probs, theta=theta)
    kind = model_to_dict(model)["model_type"]
    _emit_report(report_to_dict(report, species=args.species, model=kind,
                                split=args.split),
                 args.as_json, out=args.out)
    return 0


def _importance_svg(weights: dict[str, float]) -> str:
    bar_h, gap, label_w, scale_w = 22, 8, 120, 260
    width = label_w + scale_w + 60
    height = gap + len(weights) * (bar_h + gap)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="sans-serif" font-size="12">'
    ]
    y = gap
    for name, w in weights.items():
        bar = max(0.0, w) * scale_w
        parts.append(f'<text x="{label_w - 6}" y="{y + bar_h - 7}" '
                     f'text-anchor="end">{name}</text>')
        parts.append(f'<rect x="{label_w}" y="{y}" width="{bar:.1f}" '
                     f'height="{bar_h}" fill="#4878a8"/>')
        parts.append(f'<text x="{label_w + bar + 4:.1f}" y="{y + bar_h - 7}">'
                     f'{w:.3f}</text>')
        y += bar_h + gap
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_importance(args) -> int:
    model = load_model(args.model)
    weights = feature_importance(model)
    if not any(weights.values()):
        print("warning: model has no splits; all importance weights are zero",
              file=sys.stderr)
    Path(args.out).write_text(json.dumps(weights, indent=2) + "\n")
    if args.svg:
        Path(args.svg).write_text(_importance_svg(weights))
    for name, w in weights.items():
        print(f"{name:<14} {w:.4f}")
    return 0


def cmd_map(args) -> int:
    model = load_model(args.model)
    rasters = _load_rasters(args)
    min_lat, min_lon, max_lat, max_lon = args.bbox
    bbox = BoundingBox(min_lat=min_lat, max_lat=max_lat,
                       min_lon=min_lon, max_lon=max_lon)
    grid = predict_grid(model, rasters, bbox, step=args.step)
    rows = write_grid_csv(grid, args.out_csv)
    write_heatmap_pgm(grid, args.out_pgm)
    absent = sum(1 for _, p in grid.cells if p is None)
    print(f"{grid.n_rows}x{grid.n_cols} grid: {rows} scored cells, "
          f"{absent} without data")
    return 0


def cmd_synth(args) -> int:
    dataset = synthetic_clusters(args.n, args.separation, seed=args.seed)
    splits = split_dataset(dataset, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", splits.train), ("val", splits.val),
                       ("test", splits.test)):
        rows = write_dataset_csv(part, out_dir / f"{name}.csv")
        print(f"{name}.csv: {rows} rows")
    return 0


def cmd_export_dataset(args) -> int:
    dataset = _assemble_balanced(args)
    if not args.no_balance:
        dataset = balanced_sample(dataset, n_per_class=args.n_per_class,
                                  seed=args.seed)
    rows = write_dataset_csv(dataset, args.out)
    print(f"{args.out}: {rows} rows")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
