"""Multi-source time-series tables: construction, CSV round-trip, alignment.

A table is a strictly increasing sequence of UTC timestamps (seconds
resolution) plus an n x p matrix of 64-bit reals, with per-column metadata
naming the acquisition system each attribute came from.  Tables are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Iterable, Sequence, Union

import numpy as np

from .errors import (
    EmptyIntersection,
    EmptyTable,
    HeaderMismatch,
    NonMonotonicTimestamps,
)

TIMESTAMP_COLUMN = "timestamp"


class SourceKind(enum.Enum):
    OPERATION = "operation"
    MONITORING = "monitoring"
    ENVIRONMENT = "environment"


@dataclass(frozen=True)
class AttributeMeta:
    """Identity of one measured attribute within its acquisition system."""

    source_kind: SourceKind
    name: str
    unit: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValueError("attribute name must be nonempty")
        if not isinstance(self.source_kind, SourceKind):
            raise ValueError(f"unknown source kind: {self.source_kind!r}")


def parse_timestamp(text: str) -> int:
    """ISO-8601 instant -> epoch seconds (UTC, truncated to seconds)."""
    cleaned = text.strip()
    if cleaned.endswith("Z"):
        cleaned = cleaned[:-1] + "+00:00"
    moment = datetime.fromisoformat(cleaned)
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return int(moment.timestamp())


def format_timestamp(epoch_seconds: int) -> str:
    moment = datetime.fromtimestamp(epoch_seconds, tz=timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


class SampleTable:
    """Immutable rectangular table of finite reals keyed by timestamp."""

    __slots__ = ("timestamps", "values", "columns")

    def __init__(
        self,
        timestamps: Sequence[int],
        values,
        columns: Sequence[AttributeMeta],
    ):
        ts = tuple(int(t) for t in timestamps)
        cols = tuple(columns)
        matrix = np.array(values, dtype=np.float64, copy=True)
        if matrix.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        n, p = matrix.shape
        if n < 1 or p < 1:
            raise ValueError("table must have at least one row and one column")
        if len(ts) != n:
            raise ValueError(f"{len(ts)} timestamps for {n} rows")
        if len(cols) != p:
            raise ValueError(f"{len(cols)} column metas for {p} columns")
        if not all(isinstance(c, AttributeMeta) for c in cols):
            raise ValueError("columns must be AttributeMeta instances")
        keys = {(c.source_kind, c.name) for c in cols}
        if len(keys) != p:
            raise ValueError("duplicate (source_kind, name) column keys")
        for prev, cur in zip(ts, ts[1:]):
            if cur <= prev:
                raise NonMonotonicTimestamps(
                    f"timestamps must be strictly increasing ({prev} then {cur})"
                )
        if not np.isfinite(matrix).all():
            raise ValueError("table values must be finite")
        matrix.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", matrix)
        object.__setattr__(self, "columns", cols)

    def __setattr__(self, name, value):
        raise AttributeError("SampleTable is immutable")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]

    def column_index(self, name: str) -> int:
        for j, meta in enumerate(self.columns):
            if meta.name == name:
                return j
        raise KeyError(name)

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleTable):
            return NotImplemented
        return (
            self.timestamps == other.timestamps
            and self.columns == other.columns
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.timestamps, self.columns, self.values.tobytes()))

    def __repr__(self):
        return f"SampleTable(n={self.n_rows}, p={self.n_columns})"


@dataclass(frozen=True)
class ParseResult:
    table: SampleTable
    dropped_rows: int


def _as_text(data: Union[bytes, str, IO[bytes]]) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8")
    if isinstance(data, str):
        return data
    raw = data.read()
    if isinstance(raw, bytes):
        return raw.decode("utf-8")
    return raw


def parse_csv(data: Union[bytes, str, IO[bytes]], schema: Sequence[AttributeMeta]) -> ParseResult:
    """Parse a timestamped CSV into a SampleTable.

    The header must be ``timestamp`` followed by the schema names in order.
    Rows whose timestamp or values fail to parse, or that contain
    non-finite values, are dropped and counted.  Surviving timestamps must
    be strictly increasing.
    """
    schema = tuple(schema)
    if not schema:
        raise ValueError("schema must name at least one column")
    reader = csv.reader(io.StringIO(_as_text(data)))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyTable("input has no header row") from None
    expected = [TIMESTAMP_COLUMN] + [meta.name for meta in schema]
    if [cell.strip() for cell in header] != expected:
        raise HeaderMismatch(f"expected header {expected}, got {header}")

    p = len(schema)
    timestamps: list[int] = []
    rows: list[list[float]] = []
    dropped = 0
    for record in reader:
        if not record:
            continue
        if len(record) != p + 1:
            dropped += 1
            continue
        try:
            ts = parse_timestamp(record[0])
            values = [float(cell) for cell in record[1:]]
        except (ValueError, OverflowError):
            dropped += 1
            continue
        if not all(math.isfinite(v) for v in values):
            dropped += 1
            continue
        timestamps.append(ts)
        rows.append(values)

    if not rows:
        raise EmptyTable(f"no valid rows (dropped {dropped})")
    for prev, cur in zip(timestamps, timestamps[1:]):
        if cur <= prev:
            raise NonMonotonicTimestamps(
                f"timestamps must be strictly increasing ({prev} then {cur})"
            )
    table = SampleTable(timestamps, rows, schema)
    return ParseResult(table=table, dropped_rows=dropped)


def to_csv(table: SampleTable) -> str:
    """Serialize with 17-significant-digit values; round-trips exactly."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([TIMESTAMP_COLUMN] + [meta.name for meta in table.columns])
    for i, ts in enumerate(table.timestamps):
        writer.writerow(
            [format_timestamp(ts)] + [format(v, ".17g") for v in table.values[i]]
        )
    return out.getvalue()


def align_by_timestamp(tables: Iterable[SampleTable]) -> SampleTable:
    """Inner-join tables on exactly equal timestamps, concatenating columns.

    Timestamps equal at seconds resolution count as the same cycle; there
    is no interpolation.  Column order follows the input order.
    """
    tables = list(tables)
    if len(tables) < 2:
        raise ValueError("alignment needs at least two tables")
    metas: list[AttributeMeta] = []
    for t in tables:
        metas.extend(t.columns)
    if len({(m.source_kind, m.name) for m in metas}) != len(metas):
        raise ValueError("column metas must be pairwise distinct across tables")

    common = set(tables[0].timestamps)
    for t in tables[1:]:
        common &= set(t.timestamps)
    if not common:
        raise EmptyIntersection("tables share no timestamps")
    joined = sorted(common)

    blocks = []
    for t in tables:
        lookup = {ts: i for i, ts in enumerate(t.timestamps)}
        rows = [lookup[ts] for ts in joined]
        blocks.append(t.values[rows, :])
    return SampleTable(joined, np.hstack(blocks), metas)
