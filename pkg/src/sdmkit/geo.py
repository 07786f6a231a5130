"""Geographic primitives: ASCII grid rasters, cell sampling, great-circle distance."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParseError

EARTH_RADIUS_KM = 6371.0

_REQUIRED_HEADER = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize")
_DEFAULT_NODATA = -9999.0


@dataclass(frozen=True)
class GeoPoint:
    """A latitude/longitude pair in decimal degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class BoundingBox:
    """A non-degenerate lat/lon rectangle."""

    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float

    def __post_init__(self):
        if not self.min_lat < self.max_lat:
            raise ValueError(f"min_lat {self.min_lat} must be < max_lat {self.max_lat}")
        if not self.min_lon < self.max_lon:
            raise ValueError(f"min_lon {self.min_lon} must be < max_lon {self.max_lon}")
        for name in ("min_lat", "max_lat"):
            v = getattr(self, name)
            if not -90.0 <= v <= 90.0:
                raise ValueError(f"{name} {v} outside [-90, 90]")
        for name in ("min_lon", "max_lon"):
            v = getattr(self, name)
            if not -180.0 <= v <= 180.0:
                raise ValueError(f"{name} {v} outside [-180, 180]")

    def contains(self, p: GeoPoint) -> bool:
        return (self.min_lat <= p.lat <= self.max_lat
                and self.min_lon <= p.lon <= self.max_lon)


@dataclass(frozen=True)
class Raster:
    """A gridded environmental layer in geographic coordinates.

    ``values`` is flat row-major with the first row at the northern edge,
    mirroring how ESRI ASCII grids store their body. ``xll``/``yll`` locate
    the southwest corner of the southwest cell.
    """

    ncols: int
    nrows: int
    xll: float
    yll: float
    cellsize: float
    nodata: float
    values: tuple[float, ...]

    def __post_init__(self):
        if self.ncols < 1 or self.nrows < 1:
            raise ValueError("ncols and nrows must be >= 1")
        if not self.cellsize > 0:
            raise ValueError(f"cellsize must be > 0, got {self.cellsize}")
        values = tuple(float(v) for v in self.values)
        if len(values) != self.ncols * self.nrows:
            raise ValueError(
                f"expected {self.ncols * self.nrows} values, got {len(values)}")
        object.__setattr__(self, "values", values)


def parse_ascii_grid(text: str) -> Raster:
    """Parse ESRI ASCII grid file contents into a :class:`Raster`.

    Header keys are case-insensitive; ``NODATA_value`` is optional and
    defaults to -9999. Raises :class:`ParseError` naming the offending line
    for malformed headers, non-numeric cells, or a wrong cell count.
    """
    lines = text.splitlines()
    header: dict[str, float] = {}
    body_start = 0
    for i, line in enumerate(lines):
        parts = line.split()
        if not parts:
            body_start = i + 1
            continue
        key = parts[0].lower()
        if key not in _REQUIRED_HEADER and key != "nodata_value":
            body_start = i
            break
        if len(parts) != 2:
            raise ParseError(f"header '{parts[0]}' needs exactly one value", line=i + 1)
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric header value {parts[1]!r}", line=i + 1) from None
        body_start = i + 1

    for key in _REQUIRED_HEADER:
        if key not in header:
            raise ParseError(f"missing header key '{key}'", line=body_start)
    for key in ("ncols", "nrows"):
        if header[key] != int(header[key]) or header[key] < 1:
            raise ParseError(f"header '{key}' must be a positive integer", line=1)

    ncols = int(header["ncols"])
    nrows = int(header["nrows"])
    expected = ncols * nrows

    values: list[float] = []
    last_line = body_start
    for i in range(body_start, len(lines)):
        tokens = lines[i].split()
        if not tokens:
            continue
        last_line = i + 1
        for tok in tokens:
            try:
                values.append(float(tok))
            except ValueError:
                raise ParseError(f"non-numeric cell {tok!r}", line=i + 1) from None
        if len(values) > expected:
            raise ParseError(
                f"expected {expected} values, got at least {len(values)}", line=i + 1)
    if len(values) != expected:
        raise ParseError(
            f"expected {expected} values, got {len(values)}", line=last_line)

    return Raster(
        ncols=ncols,
        nrows=nrows,
        xll=header["xllcorner"],
        yll=header["yllcorner"],
        cellsize=header["cellsize"],
        nodata=header.get("nodata_value", _DEFAULT_NODATA),
        values=tuple(values),
    )


def dump_ascii_grid(raster: Raster) -> str:
    """Serialize a raster back to ESRI ASCII grid text (parse round-trips)."""
    out = [
        f"ncols {raster.ncols}",
        f"nrows {raster.nrows}",
        f"xllcorner {raster.xll!r}",
        f"yllcorner {raster.yll!r}",
        f"cellsize {raster.cellsize!r}",
        f"NODATA_value {raster.nodata!r}",
    ]
    for r in range(raster.nrows):
        row = raster.values[r * raster.ncols:(r + 1) * raster.ncols]
        out.append(" ".join(repr(v) for v in row))
    return "\n".join(out) + "\n"


def sample(raster: Raster, p: GeoPoint) -> float | None:
    """Value of the raster cell containing ``p``, or None outside / on nodata.

    Cell membership uses floor semantics, so a point exactly on a cell's east
    or north edge belongs to the next cell.
    """
    col = math.floor((p.lon - raster.xll) / raster.cellsize)
    row_from_south = math.floor((p.lat - raster.yll) / raster.cellsize)
    if not (0 <= col < raster.ncols and 0 <= row_from_south < raster.nrows):
        return None
    value = raster.values[(raster.nrows - 1 - row_from_south) * raster.ncols + col]
    if value == raster.nodata:
        return None
    return value


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of radius 6371 km."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))
