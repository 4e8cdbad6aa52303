"""Exogenous inputs: hourly electricity price and outdoor temperature."""
from __future__ import annotations

import csv
from dataclasses import dataclass
import math

import numpy as np


class SeriesFormatError(ValueError):
    """A CSV problem tied to a 1-based file row (the header is row 1)."""

    def __init__(self, path, row: int | None, message: str):
        self.path, self.row = str(path), row
        where = f"{path}" if row is None else f"{path}, row {row}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True, eq=False)
class ExogenousSeries:
    """Aligned price (currency/kWh) and outdoor temperature (degC) samples."""

    timestamps: np.ndarray  # datetime64[s]
    price: np.ndarray
    x_out: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        price = np.asarray(self.price, dtype=float)
        x_out = np.asarray(self.x_out, dtype=float)
        if not len(ts) == len(price) == len(x_out):
            raise ValueError("timestamps, price and x_out differ in length")
        if len(ts) > 1 and np.any(np.diff(ts) <= np.timedelta64(0, "s")):
            raise ValueError("timestamps must be strictly increasing")
        if not (np.all(np.isfinite(price)) and np.all(np.isfinite(x_out))):
            raise ValueError("series contains non-finite values")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "price", price)
        object.__setattr__(self, "x_out", x_out)

    def __len__(self):
        return len(self.price)

    def __eq__(self, other):
        if not isinstance(other, ExogenousSeries):
            return NotImplemented
        return (np.array_equal(self.timestamps, other.timestamps)
                and np.array_equal(self.price, other.price)
                and np.array_equal(self.x_out, other.x_out))

    def between(self, start, end) -> "ExogenousSeries":
        """Samples with ``start <= timestamp < end``."""
        lo, hi = np.datetime64(start, "s"), np.datetime64(end, "s")
        m = (self.timestamps >= lo) & (self.timestamps < hi)
        return ExogenousSeries(self.timestamps[m], self.price[m], self.x_out[m])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["timestamp", "price", "x_out"])
            for ts, c, x in zip(self.timestamps, self.price, self.x_out):
                w.writerow([str(ts), repr(float(c)), repr(float(x))])


DEFAULT_COLUMNS = {"timestamp": "timestamp", "price": "price", "x_out": "x_out"}


def load_csv(path, column_map: dict | None = None, dt_hours: float = 1.0) -> ExogenousSeries:
    """Read a headered CSV into an :class:`ExogenousSeries`.

    ``column_map`` maps the fields ``timestamp``, ``price`` and ``x_out`` to
    header names. Consecutive timestamps must be exactly ``dt_hours`` apart.
    """
    cmap = dict(DEFAULT_COLUMNS)
    if column_map:
        unknown = set(column_map) - set(cmap)
        if unknown:
            raise ValueError(f"unknown column_map fields: {sorted(unknown)}")
        cmap.update(column_map)
    step = np.timedelta64(int(round(dt_hours * 3600)), "s")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SeriesFormatError(path, None, "file is empty")
        header = [h.strip() for h in header]
        idx = {}
        for field_, name in cmap.items():
            if name not in header:
                raise SeriesFormatError(path, 1, f"missing column {name!r} (for {field_})")
            idx[field_] = header.index(name)
        ts, price, x_out = [], [], []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise SeriesFormatError(path, row_no, f"expected {len(header)} fields, got {len(row)}")
            try:
                t = np.datetime64(row[idx["timestamp"]].strip(), "s")
            except ValueError:
                raise SeriesFormatError(path, row_no,
                                        f"unparseable timestamp {row[idx['timestamp']]!r}") from None
            vals = []
            for field_ in ("price", "x_out"):
                raw = row[idx[field_]].strip()
                try:
                    v = float(raw)
                except ValueError:
                    raise SeriesFormatError(path, row_no,
                                            f"unparseable number {raw!r} in column {cmap[field_]!r}") from None
                if not math.isfinite(v):
                    raise SeriesFormatError(path, row_no, f"non-finite value in {cmap[field_]!r}")
                vals.append(v)
            if ts:
                gap = t - ts[-1]
                if gap != step:
                    kind = "gap" if gap > step else "non-increasing or misaligned timestamp"
                    raise SeriesFormatError(path, row_no, f"timestamp {kind}: {ts[-1]} -> {t}")
            ts.append(t)
            price.append(vals[0])
            x_out.append(vals[1])
    return ExogenousSeries(np.array(ts, dtype="datetime64[s]"), np.array(price), np.array(x_out))


@dataclass(frozen=True)
class SynthSpec:
    """Daily sinusoidal temperature and a two-peak daily price curve.

    Temperature peaks at ``temp_peak_hour``. Each price peak is a Gaussian
    bump ``(hour, height)`` of width ``price_width`` hours on top of
    ``price_base``. Noise is Gaussian with the given standard deviations.
    """

    n_points: int = 24 * 14 + 1
    start: str = "2024-02-01T00:00:00"
    dt_hours: float = 1.0
    temp_mean: float = 5.0
    temp_amplitude: float = 5.0
    temp_peak_hour: float = 15.0
    temp_noise: float = 0.5
    price_base: float = 0.10
    price_peaks: tuple[tuple[float, float], ...] = ((9.0, 0.08), (20.0, 0.12))
    price_width: float = 2.0
    price_noise: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "price_peaks",
                           tuple((float(h), float(v)) for h, v in self.price_peaks))
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.dt_hours <= 0 or self.price_width <= 0:
            raise ValueError("dt_hours and price_width must be positive")
        if self.temp_noise < 0 or self.price_noise < 0:
            raise ValueError("noise levels must be nonnegative")


def synth_series(spec: SynthSpec = SynthSpec(), seed: int = 0) -> ExogenousSeries:
    rng = np.random.default_rng(seed)
    n = spec.n_points
    hours = np.arange(n) * spec.dt_hours
    start = np.datetime64(spec.start, "s")
    ts = start + (hours * 3600).round().astype("int64").astype("timedelta64[s]")
    hod = (hours + (start - start.astype("datetime64[D]")).astype(float) / 3600) % 24
    temp = spec.temp_mean + spec.temp_amplitude * np.cos(2 * np.pi * (hod - spec.temp_peak_hour) / 24)
    price = np.full(n, spec.price_base)
    for h, height in spec.price_peaks:
        d = (hod - h + 12) % 24 - 12  # signed circular distance
        price = price + height * np.exp(-0.5 * (d / spec.price_width) ** 2)
    # draw both noise vectors even when a level is zero so seeds stay aligned
    temp = temp + spec.temp_noise * rng.standard_normal(n)
    price = np.maximum(price + spec.price_noise * rng.standard_normal(n), 0.0)
    return ExogenousSeries(ts, price, temp)
