"""Dataset assembly: observation parsing, pseudo-absence synthesis, raster joins,
class balancing, and the stratified 70:10:20 split."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, ParseError, SchemaError
from .geo import BoundingBox, GeoPoint, Raster, haversine_km, sample

logger = logging.getLogger(__name__)

FEATURE_NAMES = ("latitude", "longitude", "elevation", "precipitation", "temperature")
RASTER_NAMES = ("elevation", "precipitation", "temperature")
DATASET_HEADER = ("label",) + FEATURE_NAMES
OBSERVATION_HEADER = ("species", "latitude", "longitude", "date")

TRAIN_FRACTION = 0.7
VAL_FRACTION = 0.1


@dataclass(frozen=True)
class ObservationRecord:
    """One sighting: species name, location, ISO date, presence flag."""

    species: str
    point: GeoPoint
    date: str
    presence: bool = True

    def __post_init__(self):
        if not self.species:
            raise ValueError("species name must be non-empty")


@dataclass(frozen=True)
class Sample:
    """One labeled feature vector."""

    features: tuple[float, ...]
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        features = tuple(float(v) for v in self.features)
        if not all(math.isfinite(v) for v in features):
            raise ValueError("features must be finite")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "label", int(self.label))


@dataclass(frozen=True)
class Dataset:
    """A named feature matrix with binary labels."""

    feature_names: tuple[str, ...]
    samples: tuple[Sample, ...]
    species: str = ""

    def __post_init__(self):
        arity = len(self.feature_names)
        for s in self.samples:
            if len(s.features) != arity:
                raise ValueError(
                    f"sample arity {len(s.features)} != {arity} feature names")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def X(self) -> np.ndarray:
        return np.array([s.features for s in self.samples], dtype=float).reshape(
            len(self.samples), len(self.feature_names))

    @property
    def y(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=int)

    def class_indices(self, label: int) -> list[int]:
        return [i for i, s in enumerate(self.samples) if s.label == label]

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(self.feature_names,
                       tuple(self.samples[i] for i in indices),
                       self.species)


@dataclass(frozen=True)
class SplitDataset:
    """Train/validation/test partition of one dataset."""

    train: Dataset
    val: Dataset
    test: Dataset


def parse_observations_csv(text: str) -> list[ObservationRecord]:
    """Parse a presence-observation CSV with header species,latitude,longitude,date.

    Every parsed record carries presence=True; errors name the 1-based line.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file, expected header "
                         + ",".join(OBSERVATION_HEADER), line=1) from None
    normalized = tuple(h.strip().lower() for h in header)
    if normalized != OBSERVATION_HEADER:
        missing = [c for c in OBSERVATION_HEADER if c not in normalized]
        if missing:
            raise ParseError(f"missing column(s) {missing}", line=1)
        raise ParseError(
            f"expected header {','.join(OBSERVATION_HEADER)}, got {','.join(header)}",
            line=1)

    records = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(OBSERVATION_HEADER):
            raise ParseError(
                f"expected {len(OBSERVATION_HEADER)} fields, got {len(row)}",
                line=line_no)
        species, lat_s, lon_s, date = (field.strip() for field in row)
        try:
            lat = float(lat_s)
            lon = float(lon_s)
        except ValueError:
            raise ParseError(
                f"unparsable coordinate ({lat_s!r}, {lon_s!r})", line=line_no) from None
        try:
            record = ObservationRecord(species=species,
                                       point=GeoPoint(lat, lon),
                                       date=date)
        except ValueError as exc:
            raise ParseError(str(exc), line=line_no) from None
        records.append(record)
    return records


def presence_bounding_box(points: Sequence[GeoPoint], margin: float = 0.5) -> BoundingBox:
    """Bounding box of the presence points expanded by ``margin`` degrees per side,
    clamped to valid coordinates."""
    if not points:
        raise DataError("cannot derive a sampling region from zero presence points")
    lats = [p.lat for p in points]
    lons = [p.lon for p in points]
    return BoundingBox(
        min_lat=max(-90.0, min(lats) - margin),
        max_lat=min(90.0, max(lats) + margin),
        min_lon=max(-180.0, min(lons) - margin),
        max_lon=min(180.0, max(lons) + margin),
    )


def generate_pseudo_absences(
    presences: Sequence[GeoPoint],
    region: BoundingBox,
    count: int,
    min_dist_km: float = 1.1,
    seed: int | None = None,
    max_attempts: int | None = None,
) -> list[GeoPoint]:
    """Draw ``count`` points uniformly in ``region``, each farther than
    ``min_dist_km`` (great-circle) from every presence point.

    Rejection sampling, deterministic given ``seed``. Raises :class:`DataError`
    with the acceptance rate when ``max_attempts`` (default 1000 x count) runs
    out, which signals an over-dense presence set or a too-small region.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if max_attempts is None:
        max_attempts = 1000 * count
    if max_attempts < count:
        raise ValueError(f"max_attempts {max_attempts} < count {count}")

    rng = np.random.default_rng(seed)
    pres_lat = np.radians(np.array([p.lat for p in presences], dtype=float))
    pres_lon = np.radians(np.array([p.lon for p in presences], dtype=float))
    cos_pres = np.cos(pres_lat)

    accepted: list[GeoPoint] = []
    attempts = 0
    while len(accepted) < count and attempts < max_attempts:
        attempts += 1
        lat = rng.uniform(region.min_lat, region.max_lat)
        lon = rng.uniform(region.min_lon, region.max_lon)
        if pres_lat.size:
            phi = math.radians(lat)
            lam = math.radians(lon)
            h = (np.sin((phi - pres_lat) / 2.0) ** 2
                 + math.cos(phi) * cos_pres * np.sin((lam - pres_lon) / 2.0) ** 2)
            d = 2.0 * 6371.0 * np.arcsin(np.minimum(1.0, np.sqrt(h)))
            if not np.all(d > min_dist_km):
                continue
        accepted.append(GeoPoint(lat, lon))

    if len(accepted) < count:
        rate = len(accepted) / attempts if attempts else 0.0
        raise DataError(
            f"pseudo-absence sampling exhausted {attempts} attempts with "
            f"{len(accepted)}/{count} accepted (acceptance rate {rate:.4f}); "
            f"presence set too dense or region too small")
    return accepted


def assemble_dataset(
    presences: Sequence[ObservationRecord],
    absences: Sequence[GeoPoint],
    rasters: Mapping[str, Raster],
) -> Dataset:
    """Join points against the three rasters into the five-feature dataset.

    Feature order is latitude, longitude, elevation, precipitation,
    temperature; labels are 1 for presences and 0 for pseudo-absences. Points
    falling outside a raster or on a nodata cell are dropped (count logged).
    """
    missing = [name for name in RASTER_NAMES if name not in rasters]
    if missing:
        raise ValueError(f"missing raster(s): {missing}")
    species_names = {r.species for r in presences}
    if len(species_names) > 1:
        raise ValueError(f"records span multiple species: {sorted(species_names)}")
    species = next(iter(species_names)) if species_names else ""

    samples: list[Sample] = []
    dropped = 0

    def row_for(point: GeoPoint, label: int) -> Sample | None:
        layers = [sample(rasters[name], point) for name in RASTER_NAMES]
        if any(v is None for v in layers):
            return None
        return Sample(features=(point.lat, point.lon, *layers), label=label)

    for record in presences:
        s = row_for(record.point, 1)
        if s is None:
            dropped += 1
        else:
            samples.append(s)
    for point in absences:
        s = row_for(point, 0)
        if s is None:
            dropped += 1
        else:
            samples.append(s)

    if dropped:
        logger.info("dropped %d of %d points on nodata or out-of-grid cells",
                    dropped, len(presences) + len(absences))
    if not samples:
        raise DataError(f"zero surviving samples ({dropped} dropped on "
                        f"nodata or out-of-grid cells)")
    return Dataset(feature_names=FEATURE_NAMES, samples=tuple(samples),
                   species=species)


def balanced_sample(dataset: Dataset, n_per_class: int = 250,
                    seed: int | None = None) -> Dataset:
    """Uniform without-replacement draw of ``n_per_class`` samples per class,
    deterministic given ``seed``."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for label in (1, 0):
        idx = dataset.class_indices(label)
        if len(idx) < n_per_class:
            raise DataError(f"class {label} has {len(idx)} < {n_per_class}")
        picks = rng.choice(len(idx), size=n_per_class, replace=False)
        chosen.extend(sorted(idx[i] for i in picks))
    return dataset.subset(chosen)


def split_dataset(dataset: Dataset, seed: int | None = None) -> SplitDataset:
    """Stratified 70:10:20 split: per class, shuffle with ``seed`` then cut at
    floor(0.7 n) / floor(0.1 n) / remainder."""
    if len(dataset) < 10:
        raise DataError(f"need at least 10 samples to split, got {len(dataset)}")
    rng = np.random.default_rng(seed)
    parts: tuple[list[int], list[int], list[int]] = ([], [], [])
    for label in (0, 1):
        idx = np.array(dataset.class_indices(label), dtype=int)
        order = rng.permutation(idx.size)
        shuffled = idx[order]
        n_train = math.floor(TRAIN_FRACTION * idx.size)
        n_val = math.floor(VAL_FRACTION * idx.size)
        parts[0].extend(shuffled[:n_train].tolist())
        parts[1].extend(shuffled[n_train:n_train + n_val].tolist())
        parts[2].extend(shuffled[n_train + n_val:].tolist())
    train, val, test = (dataset.subset(sorted(p)) for p in parts)
    return SplitDataset(train=train, val=val, test=test)


def write_dataset_csv(dataset: Dataset, sink) -> int:
    """Write the dataset export CSV (``label,latitude,longitude,elevation,
    precipitation,temperature``) to a path or file object; returns the number
    of data rows. Floats are written with full repr so re-reading is exact."""
    if hasattr(sink, "write"):
        return _write_dataset_rows(dataset, sink)
    with open(sink, "w", newline="") as fh:
        return _write_dataset_rows(dataset, fh)


def _write_dataset_rows(dataset: Dataset, fh) -> int:
    fh.write(",".join(("label",) + dataset.feature_names) + "\n")
    for s in dataset.samples:
        fh.write(",".join([str(s.label)] + [repr(v) for v in s.features]) + "\n")
    return len(dataset.samples)


def read_dataset_csv(source, species: str = "") -> Dataset:
    """Read a dataset export CSV from a path or file object, enforcing the
    exact column contract."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise SchemaError("empty dataset file") from None
    if header != DATASET_HEADER:
        raise SchemaError(
            f"expected columns {','.join(DATASET_HEADER)}, got {','.join(header)}")
    samples = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(DATASET_HEADER):
            raise ParseError(f"expected {len(DATASET_HEADER)} fields, got {len(row)}",
                             line=line_no)
        try:
            label = int(row[0])
            features = tuple(float(v) for v in row[1:])
            samples.append(Sample(features=features, label=label))
        except ValueError as exc:
            raise ParseError(str(exc), line=line_no) from None
    return Dataset(feature_names=FEATURE_NAMES, samples=tuple(samples),
                   species=species)


# Synthetic two-cluster fixture in the export schema; per-feature scales keep
# the values in plausible geographic/climatic magnitudes.
SYNTH_BASE_MEAN = (40.0, -100.0, 300.0, 900.0, 12.0)
SYNTH_SIGMA = (0.5, 0.5, 40.0, 60.0, 1.5)


def synthetic_clusters(n: int, separation: float, seed: int | None = None) -> Dataset:
    """Two Gaussian clusters in the five-feature space, class-conditional means
    ``separation`` standard deviations apart in every dimension."""
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    n_pos = n // 2
    n_neg = n - n_pos
    mean0 = np.array(SYNTH_BASE_MEAN)
    sigma = np.array(SYNTH_SIGMA)
    mean1 = mean0 + separation * sigma
    pos = rng.normal(mean1, sigma, size=(n_pos, 5))
    neg = rng.normal(mean0, sigma, size=(n_neg, 5))
    samples = [Sample(features=tuple(row), label=1) for row in pos]
    samples += [Sample(features=tuple(row), label=0) for row in neg]
    return Dataset(feature_names=FEATURE_NAMES, samples=tuple(samples),
                   species="synthetic")
