"""Trajectory dataset ingestion: canonical CSV, configurable ATC-style
adapters, heading derivation for pose-only datasets, and chunking.

Observation order is always preserved from the source file; dataset prefixes
for the curve experiments are file-order prefixes.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .model import wrap_angle

DEFAULT_MIN_STEP = 0.05

CANONICAL_HEADER = ["person_id", "t", "x", "y", "delta"]

ATC_COLUMNS = ("time", "person_id", "x", "y", "z",
               "velocity", "motion_angle", "facing_angle")


class TrajectoryParseError(Exception):
    """Malformed trajectory file (fatal in strict mode)."""


@dataclass(frozen=True)
class Observation:
    """One pedestrian sample: position, heading, and bookkeeping fields.

    Timestamps and person ids are carried for heading derivation and synthetic
    generation; the likelihood evaluation ignores them.
    """

    person_id: int
    t: float
    x: float
    y: float
    delta: float


@dataclass(eq=False)
class ObservationSet:
    """Columnar, file-ordered observation stream.

    ``delta`` is NaN where the source had no motion angle; such entries must
    go through derive_headings before any counting or evaluation.

    Equality compares the five data columns (NaN equal to NaN); source and
    parse warnings are bookkeeping and excluded.
    """

    person_id: np.ndarray
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    delta: np.ndarray
    source: str = ""
    warnings: list = field(default_factory=list, repr=False)

    def __eq__(self, other):
        if not isinstance(other, ObservationSet):
            return NotImplemented
        return (np.array_equal(self.person_id, other.person_id)
                and np.array_equal(self.t, other.t, equal_nan=True)
                and np.array_equal(self.x, other.x, equal_nan=True)
                and np.array_equal(self.y, other.y, equal_nan=True)
                and np.array_equal(self.delta, other.delta, equal_nan=True))

    def __post_init__(self):
        self.person_id = np.asarray(self.person_id, dtype=np.int64)
        self.t = np.asarray(self.t, dtype=np.float64)
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        self.delta = np.asarray(self.delta, dtype=np.float64)
        n = len(self.person_id)
        for name in ("t", "x", "y", "delta"):
            if len(getattr(self, name)) != n:
                raise ValueError("observation columns must share one length")

    @classmethod
    def empty(cls, source: str = "") -> "ObservationSet":
        z = np.zeros(0)
        return cls(z, z, z, z, z, source=source)

    @classmethod
    def from_observations(cls, observations, source: str = "") -> "ObservationSet":
        observations = list(observations)
        return cls(
            person_id=np.asarray([o.person_id for o in observations], dtype=np.int64),
            t=np.asarray([o.t for o in observations], dtype=np.float64),
            x=np.asarray([o.x for o in observations], dtype=np.float64),
            y=np.asarray([o.y for o in observations], dtype=np.float64),
            delta=np.asarray([o.delta for o in observations], dtype=np.float64),
            source=source,
        )

    @classmethod
    def concat(cls, sets, source: str = "") -> "ObservationSet":
        sets = list(sets)
        if not sets:
            return cls.empty(source)
        return cls(
            person_id=np.concatenate([s.person_id for s in sets]),
            t=np.concatenate([s.t for s in sets]),
            x=np.concatenate([s.x for s in sets]),
            y=np.concatenate([s.y for s in sets]),
            delta=np.concatenate([s.delta for s in sets]),
            source=source or sets[0].source,
        )

    def __len__(self) -> int:
        return len(self.person_id)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return ObservationSet(
                self.person_id[index], self.t[index], self.x[index],
                self.y[index], self.delta[index], source=self.source,
            )
        i = int(index)
        return Observation(int(self.person_id[i]), float(self.t[i]),
                           float(self.x[i]), float(self.y[i]),
                           float(self.delta[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def missing_delta(self) -> np.ndarray:
        return np.isnan(self.delta)

    def require_deltas(self) -> "ObservationSet":
        if bool(self.missing_delta.any()):
            raise ValueError(
                "observation set has missing headings; run derive_headings first"
            )
        return self


@dataclass(frozen=True)
class AdapterConfig:
    """Column layout for delimiter-separated trajectory files.

    ``columns`` names each position; 'time', 'person_id', 'x', 'y' are
    required, 'motion_angle' supplies the heading when ``has_angle`` is true,
    anything else is ignored. ``scale`` converts positions to meters
    (0.001 for millimeter sources).
    """

    columns: tuple = ATC_COLUMNS
    scale: float = 0.001
    delimiter: str = ","
    has_angle: bool = True

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if not self.scale > 0:
            raise ValueError("position scale must be positive")
        for name in ("time", "person_id", "x", "y"):
            if name not in self.columns:
                raise ValueError(f"adapter columns must include {name!r}")
        if self.has_angle and "motion_angle" not in self.columns:
            raise ValueError("has_angle requires a 'motion_angle' column")


def load_adapter_config(path: str | os.PathLike) -> AdapterConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    kwargs = {}
    if "columns" in raw:
        kwargs["columns"] = tuple(raw["columns"])
    for key in ("scale", "delimiter", "has_angle"):
        if key in raw:
            kwargs[key] = raw[key]
    return AdapterConfig(**kwargs)


def _report(problem: str, line_no: int, path, strict: bool, warnings: list):
    message = f"{path}:{line_no}: {problem}"
    if strict:
        raise TrajectoryParseError(message)
    warnings.append(message)


def parse_canonical(path: str | os.PathLike, strict: bool = False) -> ObservationSet:
    """Parse the canonical trajectory CSV (header person_id,t,x,y,delta).

    An empty delta field marks a missing heading. Malformed rows are skipped
    with a recorded warning, or raise in strict mode.
    """
    warnings: list = []
    ids, ts, xs, ys, deltas = [], [], [], [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration as exc:
            raise TrajectoryParseError(f"{path}: empty file, no header") from exc
        if [h.strip() for h in header] != CANONICAL_HEADER:
            raise TrajectoryParseError(
                f"{path}: expected header {','.join(CANONICAL_HEADER)}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                _report(f"expected 5 fields, got {len(row)}",
                        line_no, path, strict, warnings)
                continue
            try:
                pid = int(row[0])
                t = float(row[1])
                x = float(row[2])
                y = float(row[3])
                delta = math.nan if row[4].strip() == "" else float(row[4])
            except ValueError:
                _report("unparsable field", line_no, path, strict, warnings)
                continue
            if not math.isnan(delta):
                delta = float(wrap_angle(delta))
            ids.append(pid)
            ts.append(t)
            xs.append(x)
            ys.append(y)
            deltas.append(delta)
    out = ObservationSet(np.asarray(ids, dtype=np.int64), ts, xs, ys, deltas,
                         source=os.path.basename(os.fspath(path)))
    out.warnings = warnings
    return out


def write_canonical(observations: ObservationSet, path: str | os.PathLike) -> None:
    """Write the canonical CSV; floats use repr so reparsing is exact."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CANONICAL_HEADER)
        missing = observations.missing_delta
        for i in range(len(observations)):
            delta = "" if missing[i] else repr(float(observations.delta[i]))
            writer.writerow([int(observations.person_id[i]),
                             repr(float(observations.t[i])),
                             repr(float(observations.x[i])),
                             repr(float(observations.y[i])),
                             delta])


def parse_atc(path: str | os.PathLike,
              config: AdapterConfig = AdapterConfig(),
              strict: bool = False) -> ObservationSet:
    """Parse a headerless delimiter-separated file per the adapter layout.

    Positions are scaled to meters; the motion angle, when the layout has
    one, is wrapped to [0, 2*pi). Extra columns (z, velocity, facing angle)
    are ignored.
    """
    idx = {name: i for i, name in enumerate(config.columns)}
    n_cols = len(config.columns)
    angle_idx = idx.get("motion_angle") if config.has_angle else None
    warnings: list = []
    ids, ts, xs, ys, deltas = [], [], [], [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            row = line.split(config.delimiter)
            if len(row) != n_cols:
                _report(f"expected {n_cols} fields, got {len(row)}",
                        line_no, path, strict, warnings)
                continue
            try:
                pid = int(float(row[idx["person_id"]]))
                t = float(row[idx["time"]])
                x = float(row[idx["x"]]) * config.scale
                y = float(row[idx["y"]]) * config.scale
                if angle_idx is None:
                    delta = math.nan
                else:
                    delta = float(wrap_angle(float(row[angle_idx])))
            except ValueError:
                _report("unparsable field", line_no, path, strict, warnings)
                continue
            ids.append(pid)
            ts.append(t)
            xs.append(x)
            ys.append(y)
            deltas.append(delta)
    out = ObservationSet(np.asarray(ids, dtype=np.int64), ts, xs, ys, deltas,
                         source=os.path.basename(os.fspath(path)))
    out.warnings = warnings
    return out


def derive_headings(observations: ObservationSet,
                    min_step: float = DEFAULT_MIN_STEP) -> ObservationSet:
    """Derive headings from consecutive same-person displacements.

    Each person's consecutive pair (in file order) with displacement of at
    least ``min_step`` yields delta = atan2(dy, dx) on the earlier point.
    Shorter pairs (sensor jitter around standing people) and each person's
    final point are dropped. Any deltas already present are replaced.
    """
    n = len(observations)
    if n == 0:
        return ObservationSet.empty(observations.source)
    order = np.argsort(observations.person_id, kind="stable")
    pid = observations.person_id[order]
    same = pid[:-1] == pid[1:]
    first = order[:-1][same]
    second = order[1:][same]
    dx = observations.x[second] - observations.x[first]
    dy = observations.y[second] - observations.y[first]
    moved = np.hypot(dx, dy) >= min_step
    keep = first[moved]
    deltas = wrap_angle(np.arctan2(dy[moved], dx[moved]))
    restore = np.argsort(keep, kind="stable")
    keep = keep[restore]
    deltas = deltas[restore]
    return ObservationSet(
        observations.person_id[keep], observations.t[keep],
        observations.x[keep], observations.y[keep], deltas,
        source=observations.source,
    )


def chunk(observations: ObservationSet, size: int) -> list[ObservationSet]:
    """Split into consecutive chunks of ``size`` in original order; the last
    chunk may be short."""
    if size < 1:
        raise ValueError("chunk size must be >= 1")
    return [observations[i:i + size]
            for i in range(0, len(observations), size)]
