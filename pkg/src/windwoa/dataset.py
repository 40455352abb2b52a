"""Multi-station wind records: ingestion, leave-one-out task layout,
seeded splits, normalization, and correlated synthetic generation."""

from __future__ import annotations

import csv
import datetime
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .seeding import make_rng

_GAP_TOKENS = {"", "nan", "na"}


class DataError(ValueError):
    """Bad input data: malformed file, impossible value, unusable column."""


@dataclass(frozen=True)
class StationMeta:
    name: str
    latitude: float
    longitude: float
    altitude: float
    mean_speed: float
    max_speed: float

    def __post_init__(self):
        if not self.name:
            raise DataError("station name must be non-empty")
        if not 0.0 <= self.mean_speed <= self.max_speed:
            raise DataError(f"station {self.name}: need 0 <= mean_speed <= max_speed")


@dataclass(frozen=True)
class StationFrame:
    """Aligned wind-speed matrix, one column per station, speeds in m/s."""

    stations: tuple[StationMeta, ...]
    records: np.ndarray
    timestamps: tuple[str, ...]
    gap_rows: int = 0  # incomplete rows dropped during ingestion

    def __post_init__(self):
        records = np.asarray(self.records, dtype=float)
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "stations", tuple(self.stations))
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        if len(self.stations) < 2:
            raise DataError("a frame needs at least 2 stations")
        names = [s.name for s in self.stations]
        if len(set(names)) != len(names):
            raise DataError("duplicate station names")
        if records.ndim != 2 or records.shape[1] != len(self.stations):
            raise DataError("records must be a matrix with one column per station")
        if records.shape[0] < 1:
            raise DataError("a frame needs at least one row")
        if len(self.timestamps) != records.shape[0]:
            raise DataError("timestamps must align with the record rows")
        if not np.all(np.isfinite(records)):
            raise DataError("records must be finite")
        if np.any(records < 0):
            raise DataError("wind speeds must be non-negative")

    @property
    def n_rows(self) -> int:
        return self.records.shape[0]

    @property
    def station_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.stations)

    def column_index(self, name: str) -> int:
        try:
            return self.station_names.index(name)
        except ValueError:
            raise DataError(f"unknown station: {name}") from None

    def column(self, name: str) -> np.ndarray:
        return self.records[:, self.column_index(name)]


def load_csv(path) -> StationFrame:
    """Read a station table: header `timestamp,<station>,...`.

    Rows with any missing cell are dropped and counted on the returned
    frame (gap_rows); a non-numeric cell that is not a recognized gap
    token is an error. Station order follows the header.
    """
    path = Path(path)
    try:
        with path.open(newline="") as handle:
            rows = list(csv.reader(handle))
    except FileNotFoundError:
        raise DataError(f"data file not found: {path}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [cell.strip() for cell in rows[0]]
    names = header[1:]
    if len(names) < 2:
        raise DataError(f"{path}: need at least 2 station columns, found {len(names)}")
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise DataError(f"{path}: duplicate station name(s): {', '.join(duplicates)}")

    timestamps: list[str] = []
    kept: list[list[float]] = []
    gap_rows = 0
    for line_no, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        cells = [cell.strip() for cell in row]
        if len(cells) < len(header) or cells[0] == "" or any(
            c.lower() in _GAP_TOKENS for c in cells[1:len(header)]
        ):
            gap_rows += 1
            continue
        values = []
        for name, cell in zip(names, cells[1:len(header)]):
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"{path}:{line_no}: non-numeric cell for {name}: {cell!r}") from None
            if value < 0:
                raise DataError(f"{path}:{line_no}: negative wind speed for {name}: {value}")
            values.append(value)
        timestamps.append(cells[0])
        kept.append(values)
    if not kept:
        raise DataError(f"{path}: no complete data rows")

    records = np.asarray(kept, dtype=float)
    metas = tuple(
        StationMeta(name=name, latitude=math.nan, longitude=math.nan, altitude=math.nan,
                    mean_speed=float(records[:, j].mean()), max_speed=float(records[:, j].max()))
        for j, name in enumerate(names)
    )
    return StationFrame(stations=metas, records=records,
                        timestamps=tuple(timestamps), gap_rows=gap_rows)


def write_station_csv(frame: StationFrame, path) -> None:
    """Inverse of load_csv: header row plus full-precision numeric cells."""
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["timestamp", *frame.station_names])
        for timestamp, row in zip(frame.timestamps, frame.records):
            writer.writerow([timestamp, *(repr(float(v)) for v in row)])


@dataclass(frozen=True)
class LooTask:
    """Predict one station from simultaneous readings of all the others."""

    target_station: str
    reference_stations: tuple[str, ...]
    baseline_id: str
    hybrid_id: str


def build_loo_tasks(frame: StationFrame) -> list[LooTask]:
    """One task per station, references in frame order, ids numbered from 1."""
    names = frame.station_names
    return [
        LooTask(
            target_station=target,
            reference_stations=tuple(n for n in names if n != target),
            baseline_id=f"MLP{k}",
            hybrid_id=f"MLP-WOA{k}",
        )
        for k, target in enumerate(names, start=1)
    ]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    train_indices: np.ndarray
    test_indices: np.ndarray


def random_split(n_rows: int, train_fraction: float, seed: int) -> SplitSpec:
    """Seeded uniform shuffle; round(train_fraction * n) rows go to train."""
    if n_rows < 2:
        raise ValueError("need at least 2 rows to split")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n_train = int(math.floor(train_fraction * n_rows + 0.5))  # round half up
    permutation = make_rng(seed).permutation(n_rows)
    return SplitSpec(
        train_fraction=train_fraction,
        seed=seed,
        train_indices=np.sort(permutation[:n_train]),
        test_indices=np.sort(permutation[n_train:]),
    )


@dataclass(frozen=True)
class Normalizer:
    """Per-column z-score constants fitted on training rows only."""

    columns: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray

    def _index(self, columns: Optional[Sequence[str]]) -> np.ndarray:
        if columns is None:
            return np.arange(len(self.columns))
        try:
            return np.asarray([self.columns.index(c) for c in columns])
        except ValueError as exc:
            raise DataError(f"column not covered by this normalizer: {exc}") from None

    def apply(self, values, columns: Optional[Sequence[str]] = None) -> np.ndarray:
        idx = self._index(columns)
        values = np.asarray(values, dtype=float)
        return (values - self.means[idx]) / self.stds[idx]

    def invert(self, values, columns: Optional[Sequence[str]] = None) -> np.ndarray:
        idx = self._index(columns)
        values = np.asarray(values, dtype=float)
        return values * self.stds[idx] + self.means[idx]

    def constants(self, column: str) -> tuple[float, float]:
        i = self.columns.index(column)
        return float(self.means[i]), float(self.stds[i])


def fit_normalizer(frame: StationFrame, train_indices,
                   columns: Optional[Sequence[str]] = None) -> Normalizer:
    """Fit z-score constants on the training rows of the given columns."""
    if columns is None:
        columns = frame.station_names
    idx = [frame.column_index(name) for name in columns]
    subset = frame.records[np.asarray(train_indices)][:, idx]
    means = subset.mean(axis=0)
    stds = subset.std(axis=0)
    flat = [name for name, s in zip(columns, stds) if s <= 0.0]
    if flat:
        raise DataError(f"zero variance over training rows for station(s): {', '.join(flat)}")
    return Normalizer(columns=tuple(columns), means=means, stds=stds)


def repair_correlation(matrix: np.ndarray, min_eigenvalue: float = 1e-6) -> np.ndarray:
    """Nearest usable correlation matrix: clip eigenvalues, rescale the
    diagonal back to 1. Returns the input (as float) when it is already
    sufficiently positive-definite."""
    matrix = np.asarray(matrix, dtype=float)
    values, vectors = np.linalg.eigh(matrix)
    if values.min() >= min_eigenvalue:
        return matrix.copy()
    clipped = np.clip(values, min_eigenvalue, None)
    rebuilt = (vectors * clipped) @ vectors.T
    scale = np.sqrt(np.diag(rebuilt))
    rebuilt = rebuilt / np.outer(scale, scale)
    rebuilt = (rebuilt + rebuilt.T) / 2.0
    np.fill_diagonal(rebuilt, 1.0)
    return rebuilt


def synth_generate(metas: Sequence[StationMeta], correlation, n_rows: int, seed: int,
                   sd_fraction: float = 0.5, start_date: str = "2004-01-01") -> StationFrame:
    """Correlated Gaussian wind speeds matching the stations' mean levels.

    Each column is mean + (mean * sd_fraction) * z with z drawn from a
    joint normal whose correlation is the (repaired) input matrix, then
    clipped to [0, station maximum]. Deterministic per seed.
    """
    metas = list(metas)
    k = len(metas)
    if k < 2:
        raise DataError("need at least 2 stations to synthesize")
    if n_rows < 1:
        raise DataError("n_rows must be >= 1")
    if not 0.0 < sd_fraction:
        raise DataError("sd_fraction must be positive")
    correlation = np.asarray(correlation, dtype=float)
    if correlation.shape != (k, k):
        raise DataError(f"correlation must be {k}x{k}, got {correlation.shape}")
    if not np.allclose(correlation, correlation.T, atol=1e-12):
        raise DataError("correlation matrix is not symmetric")
    if not np.allclose(np.diag(correlation), 1.0, atol=1e-12):
        raise DataError("correlation matrix must have a unit diagonal")
    for meta in metas:
        if meta.mean_speed <= 0.0:
            raise DataError(f"station {meta.name}: synthesis needs a positive mean speed")

    factor = np.linalg.cholesky(repair_correlation(correlation))
    z = make_rng(seed).standard_normal((n_rows, k))
    correlated = z @ factor.T

    records = np.empty_like(correlated)
    for j, meta in enumerate(metas):
        sd = meta.mean_speed * sd_fraction
        records[:, j] = np.clip(meta.mean_speed + sd * correlated[:, j], 0.0, meta.max_speed)

    first_day = datetime.date.fromisoformat(start_date)
    timestamps = tuple(
        (first_day + datetime.timedelta(days=i)).isoformat() for i in range(n_rows)
    )
    return StationFrame(stations=tuple(metas), records=records, timestamps=timestamps)


def correlation_matrix(frame: StationFrame) -> np.ndarray:
    """Pairwise Pearson correlations between station columns."""
    records = frame.records
    stds = records.std(axis=0)
    flat = [name for name, s in zip(frame.station_names, stds) if s <= 0.0]
    if flat:
        raise DataError(f"constant column(s): {', '.join(flat)}")
    centered = (records - records.mean(axis=0)) / stds
    corr = centered.T @ centered / records.shape[0]
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return corr


# ---------------------------------------------------------------------------
# Bundled fixtures: ten meteorological stations in Gilan province, Iran.


def _fixture_path(filename: str):
    return resources.files("windwoa").joinpath("fixtures", filename)


def load_station_meta(path=None) -> list[StationMeta]:
    """Station coordinates and wind statistics; bundled table by default."""
    source = Path(path) if path is not None else _fixture_path("gilan_meta.csv")
    metas = []
    with source.open(newline="") as handle:
        for row in csv.reader(handle):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if row[0] == "name":
                continue
            name, lat, lon, alt, mean, maximum = row
            metas.append(StationMeta(name=name, latitude=float(lat), longitude=float(lon),
                                     altitude=float(alt), mean_speed=float(mean),
                                     max_speed=float(maximum)))
    if not metas:
        raise DataError(f"{source}: no station rows")
    return metas


def load_correlation(path=None) -> tuple[list[str], np.ndarray]:
    """Pairwise station correlation table; bundled matrix by default."""
    source = Path(path) if path is not None else _fixture_path("gilan_corr.csv")
    names: list[str] = []
    rows: list[list[float]] = []
    with source.open(newline="") as handle:
        header: Optional[list[str]] = None
        for row in csv.reader(handle):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in row[1:]]
                continue
            names.append(row[0].strip())
            rows.append([float(c) for c in row[1:]])
    if header is None or not rows:
        raise DataError(f"{source}: no correlation rows")
    if names != header:
        raise DataError(f"{source}: row and column station order disagree")
    return names, np.asarray(rows, dtype=float)


def gilan_frame(n_rows: int, seed: int, sd_fraction: float = 0.5) -> StationFrame:
    """Synthetic frame shaped like the bundled Gilan station statistics."""
    metas = load_station_meta()
    names, correlation = load_correlation()
    by_name = {meta.name: meta for meta in metas}
    missing = [n for n in names if n not in by_name]
    if missing:
        raise DataError(f"correlation names missing from the station table: {', '.join(missing)}")
    ordered = [by_name[n] for n in names]
    return synth_generate(ordered, correlation, n_rows, seed, sd_fraction=sd_fraction)
