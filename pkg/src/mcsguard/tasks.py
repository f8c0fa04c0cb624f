"""Synthetic mobile-crowdsensing task population.

Generates sensing service requests whose per-feature distributions follow
the CrowdSenSim-style setup: legitimate tasks spread over the whole day
with uniform resource demands, fake tasks concentrated in the busy morning
window with long durations and high battery draw. Also owns the numeric
encoding (min-max to [-1, 1]) and the stratified train/test split.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

DURATION_CHOICES = (10, 20, 30, 40, 50, 60)

# Feature columns used by the ML models, in dataset order with the
# non-feature columns (id, legitimacy) dropped.
FEATURE_NAMES = (
    "latitude",
    "longitude",
    "day",
    "hour",
    "minute",
    "duration",
    "remaining_time",
    "battery_pct",
    "coverage",
    "grid_number",
    "on_peak_hour",
)

CSV_COLUMNS = (
    "id",
    "latitude",
    "longitude",
    "day",
    "hour",
    "minute",
    "duration",
    "remaining_time",
    "battery_pct",
    "coverage",
    "legitimacy",
    "grid_number",
    "on_peak_hour",
    "provenance",
)

PROVENANCE_LEGITIMATE = "legitimate"
PROVENANCE_ORIGINAL_FAKE = "original_fake"
PROVENANCE_ADVERSARIAL_FAKE = "adversarial_fake"


class ConfigurationError(ValueError):
    """Raised when a generation or experiment config is invalid."""


@dataclass
class SensingTask:
    id: int
    latitude: float
    longitude: float
    day: int
    hour: int
    minute: int
    duration: int
    remaining_time: int
    battery_pct: int
    coverage: float
    grid_number: int
    on_peak_hour: bool
    legitimacy: bool  # True = legitimate, False = fake

    @property
    def provenance(self):
        return PROVENANCE_LEGITIMATE if self.legitimacy else PROVENANCE_ORIGINAL_FAKE


@dataclass
class GenerationConfig:
    """Knobs for the synthetic task population.

    The bounding box is a stand-in rectangle for the Clarence-Rockland
    area; geography only feeds latitude/longitude/grid_number, so any
    rectangle works. ``on_peak_window`` is inclusive on both ends.
    ``movement_radius_range`` is carried for fidelity with the simulation
    setup but maps to no task feature.
    """

    total_tasks: int = 14484
    fake_fraction: float = 1897 / 14484
    bounding_box: tuple = (45.42, 45.56, -75.33, -75.12)  # lat_min, lat_max, lon_min, lon_max
    grid_resolution: int = 10
    on_peak_window: tuple = (7, 17)
    movement_radius_range: tuple = (10.0, 80.0)
    split_ratio: float = 0.8
    rng_seed: int = 7
    remaining_time_mode: str = "aged"  # "aged" or "full"

    def validate(self):
        lat_min, lat_max, lon_min, lon_max = self.bounding_box
        if self.total_tasks <= 0:
            raise ConfigurationError("total_tasks must be positive")
        if not (0.0 < self.fake_fraction < 1.0):
            raise ConfigurationError("fake_fraction must lie in (0, 1)")
        if not (0.0 < self.split_ratio < 1.0):
            raise ConfigurationError("split_ratio must lie in (0, 1)")
        if not (lat_min < lat_max and lon_min < lon_max):
            raise ConfigurationError("bounding_box must satisfy lat_min<lat_max, lon_min<lon_max")
        if self.grid_resolution <= 0:
            raise ConfigurationError("grid_resolution must be positive")
        start, end = self.on_peak_window
        if not (0 <= start <= end <= 23):
            raise ConfigurationError("on_peak_window must be within [0, 23]")
        if self.remaining_time_mode not in ("aged", "full"):
            raise ConfigurationError("remaining_time_mode must be 'aged' or 'full'")


@dataclass
class FeatureScaler:
    """Per-feature (min, max) pairs for the [-1, 1] min-max encoding.

    Boolean features carry fixed bounds (0, 1) so the shared affine map
    sends False to -1 and True to +1. A constant feature (min == max)
    encodes to 0 by convention.
    """

    names: tuple = FEATURE_NAMES
    mins: np.ndarray = None
    maxs: np.ndarray = None

    @classmethod
    def fit(cls, features):
        mins = features.min(axis=0).astype(float)
        maxs = features.max(axis=0).astype(float)
        bool_col = FEATURE_NAMES.index("on_peak_hour")
        mins[bool_col], maxs[bool_col] = 0.0, 1.0
        return cls(names=FEATURE_NAMES, mins=mins, maxs=maxs)

    def transform(self, features):
        span = self.maxs - self.mins
        out = np.zeros_like(features, dtype=float)
        live = span != 0
        out[:, live] = 2.0 * (features[:, live] - self.mins[live]) / span[live] - 1.0
        return out

    def inverse_transform(self, encoded):
        span = self.maxs - self.mins
        return (encoded + 1.0) / 2.0 * span + self.mins

    def to_json(self, path):
        entries = [
            {"feature": name, "min": float(lo), "max": float(hi)}
            for name, lo, hi in zip(self.names, self.mins, self.maxs)
        ]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(entries, fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            entries = json.load(fh)
        names = tuple(e["feature"] for e in entries)
        mins = np.array([e["min"] for e in entries], dtype=float)
        maxs = np.array([e["max"] for e in entries], dtype=float)
        return cls(names=names, mins=mins, maxs=maxs)


@dataclass
class DatasetSplit:
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    scaler: FeatureScaler
    train_provenance: np.ndarray = field(default=None)
    test_provenance: np.ndarray = field(default=None)

    @property
    def train_fakes(self):
        return self.train_x[self.train_y == 0]


def _sample_hours(rng, n, legitimate):
    if legitimate:
        # 8% night-time [0, 5], 92% daytime [6, 23]
        night = rng.random(n) < 0.08
        hours = np.where(night, rng.integers(0, 6, n), rng.integers(6, 24, n))
    else:
        # 80% morning rush [7, 11], 20% afternoon [12, 17]
        morning = rng.random(n) < 0.80
        hours = np.where(morning, rng.integers(7, 12, n), rng.integers(12, 18, n))
    return hours


def _sample_durations(rng, n, legitimate):
    if legitimate:
        return rng.choice(DURATION_CHOICES, n)
    long_job = rng.random(n) < 0.70
    return np.where(long_job, rng.choice((40, 50, 60), n), rng.choice((10, 20, 30), n))


def _sample_battery(rng, n, legitimate):
    if legitimate:
        return rng.integers(1, 11, n)
    greedy = rng.random(n) < 0.80
    return np.where(greedy, rng.integers(7, 11, n), rng.integers(1, 7, n))


def grid_cell(latitude, longitude, config):
    """Deterministic grid cell index for a coordinate inside the bounding box."""
    lat_min, lat_max, lon_min, lon_max = config.bounding_box
    res = config.grid_resolution
    row = np.clip(((latitude - lat_min) / (lat_max - lat_min) * res).astype(int), 0, res - 1)
    col = np.clip(((longitude - lon_min) / (lon_max - lon_min) * res).astype(int), 0, res - 1)
    return row * res + col


def generate_tasks(config):
    """Generate the full task population as a list of SensingTask.

    Reproducible from config.rng_seed; fake and legitimate rows are
    interleaved by a seeded permutation so the CSV order carries no class
    signal.
    """
    config.validate()
    rng = np.random.default_rng(config.rng_seed)
    n = config.total_tasks
    n_fake = int(round(n * config.fake_fraction))
    n_fake = min(max(n_fake, 1), n - 1)

    legitimacy = np.concatenate([np.zeros(n_fake, bool), np.ones(n - n_fake, bool)])
    legitimacy = legitimacy[rng.permutation(n)]

    lat_min, lat_max, lon_min, lon_max = config.bounding_box
    latitude = rng.uniform(lat_min, lat_max, n)
    longitude = rng.uniform(lon_min, lon_max, n)
    day = rng.integers(1, 7, n)
    minute = rng.integers(0, 60, n)
    coverage = rng.uniform(30.0, 100.0, n)

    hour = np.zeros(n, dtype=int)
    duration = np.zeros(n, dtype=int)
    battery = np.zeros(n, dtype=int)
    legit_mask = legitimacy
    fake_mask = ~legitimacy
    hour[legit_mask] = _sample_hours(rng, int(legit_mask.sum()), True)
    hour[fake_mask] = _sample_hours(rng, int(fake_mask.sum()), False)
    duration[legit_mask] = _sample_durations(rng, int(legit_mask.sum()), True)
    duration[fake_mask] = _sample_durations(rng, int(fake_mask.sum()), False)
    battery[legit_mask] = _sample_battery(rng, int(legit_mask.sum()), True)
    battery[fake_mask] = _sample_battery(rng, int(fake_mask.sum()), False)

    # Fake tasks are batch-submitted fresh, so their full duration is still
    # ahead of them. In "aged" mode a legitimate task has been listed for a
    # while and shows a strictly smaller remaining time; "full" gives every
    # task its whole duration.
    remaining = duration.copy()
    if config.remaining_time_mode == "aged":
        remaining[legit_mask] = rng.integers(0, duration[legit_mask])

    grid = grid_cell(latitude, longitude, config)
    start, end = config.on_peak_window
    on_peak = (hour >= start) & (hour <= end)

    return [
        SensingTask(
            id=i,
            latitude=float(latitude[i]),
            longitude=float(longitude[i]),
            day=int(day[i]),
            hour=int(hour[i]),
            minute=int(minute[i]),
            duration=int(duration[i]),
            remaining_time=int(remaining[i]),
            battery_pct=int(battery[i]),
            coverage=float(coverage[i]),
            grid_number=int(grid[i]),
            on_peak_hour=bool(on_peak[i]),
            legitimacy=bool(legitimacy[i]),
        )
        for i in range(n)
    ]


def feature_matrix(tasks):
    """Raw (unencoded) feature matrix in FEATURE_NAMES order."""
    rows = np.empty((len(tasks), len(FEATURE_NAMES)), dtype=float)
    for i, t in enumerate(tasks):
        rows[i] = (
            t.latitude,
            t.longitude,
            t.day,
            t.hour,
            t.minute,
            t.duration,
            t.remaining_time,
            t.battery_pct,
            t.coverage,
            t.grid_number,
            1.0 if t.on_peak_hour else 0.0,
        )
    return rows


def encode_tasks(tasks, scaler=None):
    """Encode tasks to ([-1, 1] features, 0/1 labels, scaler).

    Drops id, maps legitimacy to the label (1 = legitimate, 0 = fake) and
    the boolean feature to {-1, +1}. A supplied scaler is applied
    unchanged (test-set rule); otherwise one is fitted on the given rows.
    """
    if not tasks:
        raise ValueError("cannot encode an empty task list")
    raw = feature_matrix(tasks)
    if scaler is None:
        scaler = FeatureScaler.fit(raw)
    labels = np.array([1 if t.legitimacy else 0 for t in tasks], dtype=int)
    return scaler.transform(raw), labels, scaler


def decode_features(encoded, scaler):
    """Inverse of the min-max encoding; constant features stay at their min."""
    return scaler.inverse_transform(np.asarray(encoded, dtype=float))


def _stratified_counts(n_fake, n_legit, split_ratio):
    """Fake/legitimate train counts for a stratified split.

    The train partition holds round(total * split_ratio) rows; within
    that budget the fake count is chosen to minimize the gap between the
    train and test fake fractions, with at least one row of each class on
    each side. Ties go to the smaller fake count for determinism.
    """
    if n_fake < 2 or n_legit < 2:
        raise ValueError("split needs at least 2 rows per class to populate both partitions")
    total = n_fake + n_legit
    train_total = int(round(total * split_ratio))
    train_total = min(max(train_total, 2), total - 2)
    test_total = total - train_total

    lo = max(1, train_total - (n_legit - 1))
    hi = min(n_fake - 1, train_total - 1)
    best = None
    for fake_train in range(lo, hi + 1):
        gap = abs(fake_train / train_total - (n_fake - fake_train) / test_total)
        if best is None or gap < best[0] - 1e-15:
            best = (gap, fake_train)
    if best is None:
        raise ValueError("no allocation keeps both classes nonempty in both partitions")
    fake_train = best[1]
    return fake_train, train_total - fake_train


def split_dataset(tasks, config):
    """Stratified train/test split, scaler fitted on train rows only."""
    config.validate()
    labels = np.array([1 if t.legitimacy else 0 for t in tasks], dtype=int)
    idx_fake = np.flatnonzero(labels == 0)
    idx_legit = np.flatnonzero(labels == 1)
    if len(idx_fake) == 0 or len(idx_legit) == 0:
        raise ValueError("both classes must be present to split")

    n_fake_train, n_legit_train = _stratified_counts(
        len(idx_fake), len(idx_legit), config.split_ratio
    )
    rng = np.random.default_rng(config.rng_seed + 1)
    idx_fake = idx_fake[rng.permutation(len(idx_fake))]
    idx_legit = idx_legit[rng.permutation(len(idx_legit))]
    train_idx = np.sort(np.concatenate([idx_fake[:n_fake_train], idx_legit[:n_legit_train]]))
    test_idx = np.sort(np.concatenate([idx_fake[n_fake_train:], idx_legit[n_legit_train:]]))

    train_tasks = [tasks[i] for i in train_idx]
    test_tasks = [tasks[i] for i in test_idx]
    train_x, train_y, scaler = encode_tasks(train_tasks)
    test_x, test_y, _ = encode_tasks(test_tasks, scaler=scaler)
    return DatasetSplit(
        train_x=train_x,
        train_y=train_y,
        test_x=test_x,
        test_y=test_y,
        scaler=scaler,
        train_provenance=np.array([t.provenance for t in train_tasks]),
        test_provenance=np.array([t.provenance for t in test_tasks]),
    )


def write_dataset_csv(tasks, path):
    """One task per line, deterministic order, provenance in the last column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for t in tasks:
            writer.writerow(
                [
                    t.id,
                    repr(t.latitude),
                    repr(t.longitude),
                    t.day,
                    t.hour,
                    t.minute,
                    t.duration,
                    t.remaining_time,
                    t.battery_pct,
                    repr(t.coverage),
                    int(t.legitimacy),
                    t.grid_number,
                    int(t.on_peak_hour),
                    t.provenance,
                ]
            )


def read_dataset_csv(path):
    tasks = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            tasks.append(
                SensingTask(
                    id=int(row["id"]),
                    latitude=float(row["latitude"]),
                    longitude=float(row["longitude"]),
                    day=int(row["day"]),
                    hour=int(row["hour"]),
                    minute=int(row["minute"]),
                    duration=int(row["duration"]),
                    remaining_time=int(row["remaining_time"]),
                    battery_pct=int(row["battery_pct"]),
                    coverage=float(row["coverage"]),
                    grid_number=int(row["grid_number"]),
                    on_peak_hour=bool(int(row["on_peak_hour"])),
                    legitimacy=bool(int(row["legitimacy"])),
                )
            )
    return tasks
