"""Score a lat/lon grid with a fitted model and emit map artifacts (CSV, PGM)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import DataError, SchemaError
from .geo import BoundingBox, GeoPoint, Raster, sample
from .pipeline import FEATURE_NAMES, RASTER_NAMES


@dataclass(frozen=True)
class PredictionGrid:
    """Row-major grid of scored cell centers, row 0 at the northern edge,
    columns west to east. ``cells`` pairs each center with a probability or
    None where a raster had no data."""

    bbox: BoundingBox
    step: float
    n_rows: int
    n_cols: int
    cells: tuple[tuple[GeoPoint, Optional[float]], ...]

    def __post_init__(self):
        if len(self.cells) != self.n_rows * self.n_cols:
            raise ValueError(f"expected {self.n_rows * self.n_cols} cells, "
                             f"got {len(self.cells)}")
        for _, p in self.cells:
            if p is not None and not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")


def _cell_count(span: float, step: float) -> int:
    # tiny epsilon so spans that are exact multiples of step do not gain a row
    return max(1, math.ceil(span / step - 1e-9))


def predict_grid(model, rasters: Mapping[str, Raster], bbox: BoundingBox,
                 step: float) -> PredictionGrid:
    """Score every cell center of a ``step``-degree grid over ``bbox``.

    Cell centers (not corners) are scored. Each center is fed to the model as
    the pipeline's five-feature vector; cells where any raster lacks data are
    left absent. Raises :class:`DataError` when no cell can be scored at all,
    which is what a bbox fully outside the rasters looks like.
    """
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    missing = [name for name in RASTER_NAMES if name not in rasters]
    if missing:
        raise ValueError(f"missing raster(s): {missing}")
    names = getattr(model, "feature_names_", None)
    if names is not None and tuple(names) != FEATURE_NAMES:
        raise SchemaError(f"model features {tuple(names)} do not match the "
                          f"pipeline order {FEATURE_NAMES}")

    n_rows = _cell_count(bbox.max_lat - bbox.min_lat, step)
    n_cols = _cell_count(bbox.max_lon - bbox.min_lon, step)

    centers: list[GeoPoint] = []
    features: list[tuple[float, ...] | None] = []
    for i in range(n_rows):
        lat = min(max(bbox.max_lat - (i + 0.5) * step, -90.0), 90.0)
        for j in range(n_cols):
            lon = min(max(bbox.min_lon + (j + 0.5) * step, -180.0), 180.0)
            point = GeoPoint(lat, lon)
            centers.append(point)
            layers = [sample(rasters[name], point) for name in RASTER_NAMES]
            if any(v is None for v in layers):
                features.append(None)
            else:
                features.append((lat, lon, *layers))

    valid = [k for k, f in enumerate(features) if f is not None]
    if not valid:
        raise DataError("no grid cell overlaps the rasters; bounding box is "
                        "outside the data or entirely nodata")
    X = np.array([features[k] for k in valid], dtype=float)
    probs = model.predict_proba(X)[:, 1]

    scores: list[Optional[float]] = [None] * len(centers)
    for k, p in zip(valid, probs):
        scores[k] = float(p)
    cells = tuple(zip(centers, scores))
    return PredictionGrid(bbox=bbox, step=step, n_rows=n_rows, n_cols=n_cols,
                          cells=cells)


def write_grid_csv(grid: PredictionGrid, sink) -> int:
    """Write ``latitude,longitude,probability`` rows for scored cells only;
    returns the row count. Probabilities carry six decimals."""
    if hasattr(sink, "write"):
        return _write_csv_rows(grid, sink)
    with open(sink, "w", newline="") as fh:
        return _write_csv_rows(grid, fh)


def _write_csv_rows(grid: PredictionGrid, fh) -> int:
    fh.write("latitude,longitude,probability\n")
    count = 0
    for point, prob in grid.cells:
        if prob is None:
            continue
        fh.write(f"{point.lat!r},{point.lon!r},{prob:.6f}\n")
        count += 1
    return count


def write_heatmap_pgm(grid: PredictionGrid, sink) -> None:
    """Plain (P2) portable graymap, one pixel per cell, intensity
    round(255 x probability), 0 for absent cells; row 0 is the northern edge."""
    if hasattr(sink, "write"):
        _write_pgm_rows(grid, sink)
        return
    with open(sink, "w", newline="") as fh:
        _write_pgm_rows(grid, fh)


def _write_pgm_rows(grid: PredictionGrid, fh) -> None:
    fh.write(f"P2\n{grid.n_cols} {grid.n_rows}\n255\n")
    for i in range(grid.n_rows):
        row = grid.cells[i * grid.n_cols:(i + 1) * grid.n_cols]
        pixels = [0 if p is None else int(round(255.0 * p)) for _, p in row]
        fh.write(" ".join(str(v) for v in pixels) + "\n")
