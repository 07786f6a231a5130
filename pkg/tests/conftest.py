import numpy as np
import pytest

from sdmkit.geo import Raster, dump_ascii_grid


def build_raster(base, slope_lat, slope_lon, ncols=14, nrows=12, xll=-107.0,
                 yll=38.0, cellsize=0.5, nodata=-9999.0, holes=()):
    """A raster with a linear spatial gradient so models can learn geography."""
    values = []
    for r in range(nrows):          # r = 0 is the northern row
        for c in range(ncols):
            lat = yll + (nrows - 1 - r + 0.5) * cellsize
            lon = xll + (c + 0.5) * cellsize
            values.append(base + slope_lat * lat + slope_lon * lon)
    values = list(values)
    for idx in holes:
        values[idx] = nodata
    return Raster(ncols=ncols, nrows=nrows, xll=xll, yll=yll,
                  cellsize=cellsize, nodata=nodata, values=tuple(values))


@pytest.fixture
def raster_files(tmp_path):
    """Three .asc layers covering lat 38..44, lon -107..-100."""
    paths = {}
    for name, (base, s_lat, s_lon) in {
        "elevation": (1200.0, 40.0, 10.0),
        "precipitation": (800.0, -12.0, 4.0),
        "temperature": (25.0, -0.4, 0.05),
    }.items():
        raster = build_raster(base, s_lat, s_lon)
        path = tmp_path / f"{name}.asc"
        path.write_text(dump_ascii_grid(raster))
        paths[name] = path
    return paths


def write_observations(path, n=270, seed=0, species="Blue Jay",
                       lat_range=(39.2, 40.8), lon_range=(-105.8, -104.2)):
    rng = np.random.default_rng(seed)
    lines = ["species,latitude,longitude,date"]
    for k in range(n):
        lat = rng.uniform(*lat_range)
        lon = rng.uniform(*lon_range)
        lines.append(f"{species},{lat!r},{lon!r},2023-05-{k % 28 + 1:02d}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def observations_file(tmp_path):
    return write_observations(tmp_path / "observations.csv")
