"""Header matching, row validation, category interning and drop logging."""

from __future__ import annotations

import numpy as np
import pytest

from helpers import BASE_HEADER, make_csv, make_row
from riskml.errors import CleanseError, ParseError, SchemaError
from riskml.ingest import (
    MISSING_CATEGORY,
    CleanDataset,
    cleanse,
    parse_dataset,
)
from riskml.schema import (
    CASUALTY_COLUMNS,
    CATEGORICAL_COLUMNS,
    COUNT_COLUMNS,
    EXCLUDED_KINDS,
    ColumnKind,
    ColumnSpec,
    default_schema,
    normalize_name,
)


def test_normalize_name_folds_case_accents_and_whitespace():
    assert normalize_name("  tipo_acid ") == "TIPO_ACID"
    assert normalize_name("Região") == "REGIAO"
    assert normalize_name("PREDIAL1") == "PREDIAL1"


def test_default_schema_names_are_unique_and_kinds_assigned():
    schema = default_schema()
    names = [s.name for s in schema]
    assert len(names) == len(set(names))
    kinds = {s.name: s.kind for s in schema}
    assert kinds["MOTO"] is ColumnKind.COUNT
    assert kinds["TIPO_ACID"] is ColumnKind.CATEGORICAL
    assert kinds["FERIDOS"] is ColumnKind.CASUALTY
    assert kinds["DATA_HORA"] is ColumnKind.DATETIME
    assert kinds["FONTE"] is ColumnKind.EXCLUDED_LEAK
    assert kinds["UPS"] is ColumnKind.EXCLUDED_LEAK
    assert kinds["ID"] is ColumnKind.EXCLUDED_ID
    assert kinds["LATITUDE"] is ColumnKind.EXCLUDED_GEO


def test_column_spec_dict_roundtrip():
    spec = ColumnSpec("MOTO", ColumnKind.COUNT)
    assert ColumnSpec.from_dict(spec.to_dict()) == spec


def test_parse_matches_header_case_and_accent_insensitively():
    header = list(BASE_HEADER)
    header[header.index("TIPO_ACID")] = "tipo_acid"
    header[header.index("MOTO")] = " Moto "
    raw = parse_dataset(make_csv([make_row(), make_row()], header=header))
    assert raw.n_rows == 2
    by_name = {s.name: s.kind for s in raw.column_specs}
    assert by_name["TIPO_ACID"] is ColumnKind.CATEGORICAL
    assert by_name["MOTO"] is ColumnKind.COUNT
    assert raw.unknown_columns == []


def test_parse_latin1_fallback_preserves_accented_cells():
    row = make_row(TIPO_ACID="COLISÃO")
    data = make_csv([row]).decode("utf-8").encode("latin-1")
    raw = parse_dataset(data)
    clean = cleanse(raw)
    assert clean.categories["TIPO_ACID"] == ["COLISÃO"]


def test_parse_unknown_column_is_kept_then_dropped_by_cleanse():
    header = BASE_HEADER + ["MYSTERY"]
    rows = [make_row() + ["whatever"] for _ in range(3)]
    raw = parse_dataset(make_csv(rows, header=header))
    assert raw.unknown_columns == ["MYSTERY"]
    assert raw.column_specs[-1].kind is ColumnKind.EXCLUDED_GEO
    clean = cleanse(raw)
    assert "MYSTERY" not in clean.columns
    assert all(s.name != "MYSTERY" for s in clean.schema)


def test_parse_duplicate_column_raises():
    header = BASE_HEADER + ["moto"]
    rows = [make_row() + ["1"]]
    with pytest.raises(ParseError, match="appears at positions"):
        parse_dataset(make_csv(rows, header=header))


def test_parse_missing_required_column_raises():
    header = [name for name in BASE_HEADER if name != "MOTO"]
    rows = [[cell for name, cell in zip(BASE_HEADER, make_row()) if name != "MOTO"]]
    with pytest.raises(SchemaError, match="MOTO"):
        parse_dataset(make_csv(rows, header=header))


def test_parse_missing_excluded_columns_is_fine():
    # BASE_HEADER carries no ID, leakage or geography columns at all
    raw = parse_dataset(make_csv([make_row()]))
    assert raw.n_rows == 1


def test_parse_ragged_row_raises():
    rows = [make_row(), make_row() + ["extra"]]
    with pytest.raises(ParseError, match="expected"):
        parse_dataset(make_csv(rows))


def test_parse_empty_input_raises():
    with pytest.raises(ParseError, match="no header row"):
        parse_dataset(b"")
    with pytest.raises(ParseError, match="no header row"):
        parse_dataset(b"\n\n")


def test_parse_reads_file_path(tmp_path):
    path = tmp_path / "table.csv"
    path.write_bytes(make_csv([make_row()]))
    assert parse_dataset(path).n_rows == 1
    assert parse_dataset(str(path)).n_rows == 1
    assert parse_dataset(path).source_uri == str(path)


def test_cleanse_drops_bad_rows_with_reasons_and_indices():
    rows = [make_row() for _ in range(20)]
    rows[3] = make_row(DATA_HORA="2013-13-40 99:99")
    rows[7] = make_row(MOTO="-1")
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.n_rows == 18
    assert clean.dropped.dropped_row_indices == [3, 7]
    assert clean.dropped.reasons == ["invalid date/time", "invalid count"]


def test_cleanse_reason_uses_first_failing_cell_in_header_order():
    # counts precede the datetime column, so the count reason wins
    rows = [make_row() for _ in range(10)]
    rows[4] = make_row(MOTO="oops", DATA_HORA="not-a-date")
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.dropped.reasons == ["invalid count"]

    rows[4] = make_row(DATA_HORA="not-a-date")
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.dropped.reasons == ["invalid date/time"]


def test_cleanse_rejects_non_integer_count_cells():
    rows = [make_row() for _ in range(10)]
    rows[0] = make_row(AUTO="3.5")
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.dropped.reasons == ["invalid count"]


def test_cleanse_accepts_padded_and_signed_counts():
    rows = [make_row(AUTO=" 7 ", MOTO="+3", TAXI="007")]
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.counts("AUTO")[0] == 7
    assert clean.counts("MOTO")[0] == 3
    assert clean.counts("TAXI")[0] == 7


def test_cleanse_aborts_above_drop_tolerance():
    rows = [make_row() for _ in range(10)]
    rows[1] = make_row(DATA_HORA="bad")
    rows[2] = make_row(DATA_HORA="bad")
    with pytest.raises(CleanseError, match="dropped"):
        cleanse(parse_dataset(make_csv(rows)))


def test_cleanse_tolerance_boundary_is_exclusive():
    # exactly 10% dropped is still acceptable
    rows = [make_row() for _ in range(10)]
    rows[1] = make_row(DATA_HORA="bad")
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.n_rows == 9


def test_cleanse_zero_data_rows_raises():
    with pytest.raises(CleanseError, match="no data rows"):
        cleanse(parse_dataset(make_csv([])))


def test_cleanse_empty_categorical_cell_becomes_missing():
    rows = [make_row(TEMPO=""), make_row(TEMPO="BOM")]
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.categories["TEMPO"] == [MISSING_CATEGORY, "BOM"]
    assert clean.codes("TEMPO").tolist() == [0, 1]


def test_cleanse_interns_categories_in_first_appearance_order():
    rows = [
        make_row(TIPO_ACID="B"),
        make_row(TIPO_ACID="A"),
        make_row(TIPO_ACID="B"),
        make_row(TIPO_ACID="C"),
    ]
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.categories["TIPO_ACID"] == ["B", "A", "C"]
    assert clean.codes("TIPO_ACID").tolist() == [0, 1, 0, 2]


def test_cleanse_interning_skips_dropped_rows():
    rows = [make_row(TIPO_ACID="KEPT") for _ in range(9)]
    rows.insert(0, make_row(TIPO_ACID="GONE", DATA_HORA="bad"))
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.categories["TIPO_ACID"] == ["KEPT"]


def test_cleanse_removes_excluded_columns():
    header = BASE_HEADER + ["FONTE", "UPS", "ID"]
    rows = [make_row() + ["EPTC", "5", str(i)] for i in range(4)]
    clean = cleanse(parse_dataset(make_csv(rows, header=header)))
    assert all(s.kind not in EXCLUDED_KINDS for s in clean.schema)
    for name in ("FONTE", "UPS", "ID"):
        assert name not in clean.columns


def test_cleanse_binary_flag_accepts_only_zero_and_one():
    schema = [
        ColumnSpec("FLAG", ColumnKind.BINARY_FLAG),
        ColumnSpec("WHEN", ColumnKind.DATETIME),
    ]
    data = b"FLAG;WHEN\n1;2013-01-01 00:00\n0;2013-01-01 00:00\n2;2013-01-01 00:00\n"
    raw = parse_dataset(data, schema=schema)
    clean = cleanse(raw, max_drop_fraction=0.5)
    assert clean.counts("FLAG").tolist() == [1, 0]
    assert clean.dropped.reasons == ["invalid count"]


def test_cleanse_custom_datetime_format():
    schema = [ColumnSpec("WHEN", ColumnKind.DATETIME)]
    data = b"WHEN\n31/12/2013\n2013-12-31\n"
    raw = parse_dataset(data, schema=schema)
    clean = cleanse(raw, datetime_format="%d/%m/%Y", max_drop_fraction=0.5)
    assert clean.datetime_text["WHEN"] == ["31/12/2013"]
    assert clean.dropped.reasons == ["invalid date/time"]


def test_cleanse_default_format_accepts_seconds_and_bare_date():
    rows = [
        make_row(DATA_HORA="2013-05-01 10:30:45"),
        make_row(DATA_HORA="2013-05-01"),
    ]
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.n_rows == 2


def test_clean_dataset_dict_roundtrip():
    rows = [make_row(MOTO=i % 3, TIPO_ACID=f"T{i % 2}") for i in range(6)]
    rows[2] = make_row(DATA_HORA="nope")
    clean = cleanse(parse_dataset(make_csv(rows)), max_drop_fraction=0.5)
    back = CleanDataset.from_dict(clean.to_dict())
    assert back.n_rows == clean.n_rows
    assert [s.to_dict() for s in back.schema] == [s.to_dict() for s in clean.schema]
    assert back.categories == clean.categories
    assert back.datetime_text == clean.datetime_text
    assert back.dropped.to_dict() == clean.dropped.to_dict()
    for name in clean.columns:
        assert np.array_equal(back.columns[name], clean.columns[name])
        assert back.columns[name].dtype == clean.columns[name].dtype


def test_clean_dataset_column_accessors_and_dtypes():
    rows = [make_row(MOTO="2", FERIDOS="1")]
    clean = cleanse(parse_dataset(make_csv(rows)))
    assert clean.counts("MOTO").dtype == np.int64
    assert clean.codes("LOCAL").dtype == np.int32
    assert clean.n_rows == 1
    assert [s.name for s in clean.specs_of(ColumnKind.COUNT)] == COUNT_COLUMNS
    assert [s.name for s in clean.specs_of(ColumnKind.CATEGORICAL)] == CATEGORICAL_COLUMNS
    assert [s.name for s in clean.specs_of(ColumnKind.CASUALTY)] == CASUALTY_COLUMNS
