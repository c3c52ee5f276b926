"""Builders for small inline CSV fixtures used across the test modules."""

from __future__ import annotations

from riskml.schema import (
    CASUALTY_COLUMNS,
    CATEGORICAL_COLUMNS,
    COUNT_COLUMNS,
    DEFAULT_DATETIME_COLUMN,
)

#: every non-excluded column of the default schema, in schema order
BASE_HEADER = (
    COUNT_COLUMNS + CATEGORICAL_COLUMNS + CASUALTY_COLUMNS + [DEFAULT_DATETIME_COLUMN]
)


def make_row(**overrides: object) -> list[str]:
    """One valid data row as a cell list; override any column by name."""
    cells = {name: "0" for name in COUNT_COLUMNS}
    for name in CATEGORICAL_COLUMNS:
        cells[name] = f"{name.lower()}_a"
    for name in CASUALTY_COLUMNS:
        cells[name] = "0"
    cells[DEFAULT_DATETIME_COLUMN] = "2013-05-01 10:30"
    for key, value in overrides.items():
        if key not in cells:
            raise KeyError(f"unknown column {key!r}")
        cells[key] = str(value)
    return [cells[name] for name in BASE_HEADER]


def make_csv(rows: list[list[str]], header: list[str] | None = None) -> bytes:
    """Semicolon-delimited CSV bytes from a header and cell lists."""
    head = header if header is not None else BASE_HEADER
    lines = [";".join(head)] + [";".join(row) for row in rows]
    return ("\n".join(lines) + "\n").encode("utf-8")
