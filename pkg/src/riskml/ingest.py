"""CSV ingestion and row cleansing.

The loader is two-staged.  ``parse_dataset`` reads the raw
delimiter-separated bytes, matches the header against a schema and
checks structure only.  ``cleanse`` then validates cell contents row by
row, drops rows that fail (keeping a log of what was dropped and why),
interns categorical values as integer codes and removes every excluded
column.  Splitting the stages keeps structural errors (wrong file)
loudly fatal while tolerating the handful of bad records a municipal
export typically contains.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import CleanseError, ParseError, SchemaError, ValidationError
from .schema import (
    DEFAULT_DATETIME_FORMAT,
    EXCLUDED_KINDS,
    ColumnKind,
    ColumnSpec,
    default_schema,
    normalize_name,
)

logger = logging.getLogger(__name__)

#: category label assigned to empty categorical cells
MISSING_CATEGORY = "(missing)"

#: fraction of dropped rows above which cleansing aborts
MAX_DROP_FRACTION = 0.1


@dataclass
class RawDataset:
    """Parsed but unvalidated records plus the resolved column specs."""

    header: list[str]
    rows: list[list[str]]
    source_uri: str
    column_specs: list[ColumnSpec]
    unknown_columns: list[str] = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass
class CleanseLog:
    dropped_row_indices: list[int] = field(default_factory=list)
    reasons: list[str] = field(default_factory=list)

    def add(self, row_index: int, reason: str) -> None:
        self.dropped_row_indices.append(row_index)
        self.reasons.append(reason)

    @property
    def n_dropped(self) -> int:
        return len(self.dropped_row_indices)

    def to_dict(self) -> dict:
        return {
            "dropped_row_indices": list(self.dropped_row_indices),
            "reasons": list(self.reasons),
        }

    @staticmethod
    def from_dict(d: dict) -> "CleanseLog":
        return CleanseLog(
            dropped_row_indices=list(d["dropped_row_indices"]),
            reasons=list(d["reasons"]),
        )


class CleanDataset:
    """Typed, validated columns with all excluded columns removed.

    Count-like columns are int64 arrays, categorical columns are int32
    code arrays with a per-column category list (codes assigned in first
    appearance order), and datetime columns keep their validated text.
    """

    def __init__(
        self,
        schema: list[ColumnSpec],
        columns: dict[str, np.ndarray],
        categories: dict[str, list[str]],
        datetime_text: dict[str, list[str]],
        dropped: CleanseLog,
        source_uri: str = "",
    ):
        self.schema = schema
        self.columns = columns
        self.categories = categories
        self.datetime_text = datetime_text
        self.dropped = dropped
        self.source_uri = source_uri

    @property
    def n_rows(self) -> int:
        for spec in self.schema:
            if spec.kind is ColumnKind.DATETIME:
                return len(self.datetime_text[spec.name])
            return len(self.columns[spec.name])
        return 0

    def specs_of(self, kind: ColumnKind) -> list[ColumnSpec]:
        return [s for s in self.schema if s.kind is kind]

    def counts(self, name: str) -> np.ndarray:
        return self.columns[name]

    def codes(self, name: str) -> np.ndarray:
        return self.columns[name]

    def category_labels(self, name: str) -> list[str]:
        return self.categories[name]

    def to_dict(self) -> dict:
        cols = {}
        for spec in self.schema:
            if spec.kind is ColumnKind.DATETIME:
                cols[spec.name] = list(self.datetime_text[spec.name])
            else:
                cols[spec.name] = [int(v) for v in self.columns[spec.name]]
        return {
            "format_version": 1,
            "schema": [s.to_dict() for s in self.schema],
            "columns": cols,
            "categories": {k: list(v) for k, v in self.categories.items()},
            "dropped": self.dropped.to_dict(),
            "source_uri": self.source_uri,
        }

    @staticmethod
    def from_dict(d: dict) -> "CleanDataset":
        schema = [ColumnSpec.from_dict(s) for s in d["schema"]]
        columns: dict[str, np.ndarray] = {}
        datetime_text: dict[str, list[str]] = {}
        for spec in schema:
            raw = d["columns"][spec.name]
            if spec.kind is ColumnKind.DATETIME:
                datetime_text[spec.name] = list(raw)
            elif spec.kind is ColumnKind.CATEGORICAL:
                columns[spec.name] = np.asarray(raw, dtype=np.int32)
            else:
                columns[spec.name] = np.asarray(raw, dtype=np.int64)
        return CleanDataset(
            schema=schema,
            columns=columns,
            categories={k: list(v) for k, v in d["categories"].items()},
            datetime_text=datetime_text,
            dropped=CleanseLog.from_dict(d["dropped"]),
            source_uri=d.get("source_uri", ""),
        )


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        return data.decode("latin-1")


def parse_dataset(
    csv_source: bytes | str | Path,
    schema: list[ColumnSpec] | None = None,
    delimiter: str = ";",
) -> RawDataset:
    """Read a delimited text table and match its header to the schema.

    ``csv_source`` may be raw bytes or a file path.  Decoding tries
    UTF-8 first and falls back to Latin-1, which covers both encodings
    the municipal exports have shipped with.  Header matching is case
    and accent insensitive.  Unknown columns are kept in the raw rows
    but marked as excluded pass-through so cleansing removes them.
    """
    if schema is None:
        schema = default_schema()
    if isinstance(csv_source, (str, Path)):
        path = Path(csv_source)
        data = path.read_bytes()
        source_uri = str(path)
    else:
        data = csv_source
        source_uri = "<bytes>"

    text = _decode(data)
    reader = csv.reader(io.StringIO(text, newline=""), delimiter=delimiter)
    try:
        records = [row for row in reader if row]
    except csv.Error as exc:
        raise ParseError(f"malformed CSV in {source_uri}: {exc}") from exc
    if not records:
        raise ParseError(f"{source_uri}: no header row")

    header = [cell.strip() for cell in records[0]]
    rows = records[1:]

    by_norm = {normalize_name(s.name): s for s in schema}
    specs: list[ColumnSpec] = []
    unknown: list[str] = []
    seen: dict[str, int] = {}
    for position, cell in enumerate(header):
        key = normalize_name(cell)
        matched = by_norm.get(key)
        if matched is None:
            unknown.append(cell)
            specs.append(ColumnSpec(cell, ColumnKind.EXCLUDED_GEO))
            continue
        if matched.name in seen:
            raise ParseError(
                f"{source_uri}: column {matched.name!r} appears at positions "
                f"{seen[matched.name]} and {position}"
            )
        seen[matched.name] = position
        specs.append(matched)

    required = [
        s for s in schema
        if s.kind not in EXCLUDED_KINDS and s.name not in seen
    ]
    if required:
        missing = ", ".join(s.name for s in required)
        raise SchemaError(f"{source_uri}: missing required column(s): {missing}")

    if unknown:
        logger.warning(
            "%s: %d unknown column(s) will be dropped: %s",
            source_uri, len(unknown), ", ".join(unknown),
        )

    arity = len(header)
    for i, row in enumerate(rows):
        if len(row) != arity:
            raise ParseError(
                f"{source_uri}: row {i + 1} has {len(row)} cells, expected {arity}"
            )

    return RawDataset(
        header=header,
        rows=rows,
        source_uri=source_uri,
        column_specs=specs,
        unknown_columns=unknown,
    )


def _parse_datetime_cell(value: str, fmt: str) -> bool:
    """True when ``value`` is a valid timestamp under ``fmt``.

    The default format additionally accepts a seconds field or a bare
    date, since the export is inconsistent about the time portion.
    """
    text = value.strip()
    candidates = [fmt]
    if fmt == DEFAULT_DATETIME_FORMAT:
        candidates += ["%Y-%m-%d %H:%M:%S", "%Y-%m-%d"]
    for candidate in candidates:
        try:
            datetime.strptime(text, candidate)
            return True
        except ValueError:
            continue
    return False


def _parse_count_cell(value: str, binary: bool = False) -> int | None:
    text = value.strip()
    if not text or not (text.isdigit() or (text[0] in "+-" and text[1:].isdigit())):
        return None
    number = int(text)
    if number < 0:
        return None
    if binary and number not in (0, 1):
        return None
    return number


def cleanse(
    raw: RawDataset,
    schema: list[ColumnSpec] | None = None,
    datetime_format: str = DEFAULT_DATETIME_FORMAT,
    max_drop_fraction: float = MAX_DROP_FRACTION,
) -> CleanDataset:
    """Validate cells, drop bad rows, intern categories, drop excluded columns.

    Rows failing datetime validation are logged with reason
    "invalid date/time"; rows with unparseable or negative count cells
    with reason "invalid count".  Raises when the drop fraction exceeds
    ``max_drop_fraction``, which almost always means the format or
    schema is wrong rather than the data being mildly dirty.
    """
    specs = schema if schema is not None else raw.column_specs
    if len(specs) != len(raw.header):
        raise ValidationError(
            f"schema has {len(specs)} specs for {len(raw.header)} header columns"
        )
    if raw.n_rows == 0:
        raise CleanseError(f"{raw.source_uri}: dataset has no data rows")

    positions = list(range(len(specs)))
    retained = [
        (pos, spec) for pos, spec in zip(positions, specs)
        if spec.kind not in EXCLUDED_KINDS
    ]

    int_like = {ColumnKind.COUNT, ColumnKind.CASUALTY, ColumnKind.BINARY_FLAG}
    out_ints: dict[str, list[int]] = {
        s.name: [] for _, s in retained if s.kind in int_like
    }
    out_codes: dict[str, list[int]] = {
        s.name: [] for _, s in retained if s.kind is ColumnKind.CATEGORICAL
    }
    out_text: dict[str, list[str]] = {
        s.name: [] for _, s in retained if s.kind is ColumnKind.DATETIME
    }
    interned: dict[str, dict[str, int]] = {name: {} for name in out_codes}

    log = CleanseLog()
    for i, row in enumerate(raw.rows):
        reason = None
        parsed_ints: list[tuple[str, int]] = []
        for pos, spec in retained:
            cell = row[pos]
            if spec.kind is ColumnKind.DATETIME:
                if not _parse_datetime_cell(cell, datetime_format):
                    reason = "invalid date/time"
                    break
            elif spec.kind in int_like:
                number = _parse_count_cell(
                    cell, binary=spec.kind is ColumnKind.BINARY_FLAG
                )
                if number is None:
                    reason = "invalid count"
                    break
                parsed_ints.append((spec.name, number))
        if reason is not None:
            log.add(i, reason)
            continue

        for name, number in parsed_ints:
            out_ints[name].append(number)
        for pos, spec in retained:
            if spec.kind is ColumnKind.CATEGORICAL:
                label = row[pos].strip() or MISSING_CATEGORY
                mapping = interned[spec.name]
                code = mapping.setdefault(label, len(mapping))
                out_codes[spec.name].append(code)
            elif spec.kind is ColumnKind.DATETIME:
                out_text[spec.name].append(row[pos].strip())

    if log.n_dropped / raw.n_rows > max_drop_fraction:
        raise CleanseError(
            f"{raw.source_uri}: {log.n_dropped} of {raw.n_rows} rows dropped "
            f"(> {max_drop_fraction:.0%}); check delimiter, schema and datetime format"
        )

    clean_schema = [spec for _, spec in retained]
    columns: dict[str, np.ndarray] = {}
    for name, values in out_ints.items():
        columns[name] = np.asarray(values, dtype=np.int64)
    for name, values in out_codes.items():
        columns[name] = np.asarray(values, dtype=np.int32)
    categories = {
        name: list(mapping.keys()) for name, mapping in interned.items()
    }
    return CleanDataset(
        schema=clean_schema,
        columns=columns,
        categories=categories,
        datetime_text=out_text,
        dropped=log,
        source_uri=raw.source_uri,
    )
