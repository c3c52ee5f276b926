"""Target derivation, one-hot encoding, scaling and splitting."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_csv, make_row
from riskml.errors import ValidationError
from riskml.features import (
    TARGET_COLUMN,
    DesignMatrix,
    OneHotEncoder,
    ScalerParams,
    SplitIndices,
    apply_scaler,
    derive_target,
    encode,
    fit_scaler,
    split,
)
from riskml.ingest import cleanse, parse_dataset
from riskml.schema import COUNT_COLUMNS


def _clean(rows):
    return cleanse(parse_dataset(make_csv(rows)), max_drop_fraction=1.0)


def test_derive_target_is_binarized_casualty_sum():
    out = derive_target(
        np.array([0, 1, 0, 0]),
        np.array([0, 0, 2, 0]),
        np.array([0, 0, 0, 0]),
        np.array([0, 0, 1, 0]),
        np.array([0, 0, 1, 0]),
    )
    assert out.tolist() == [0, 1, 1, 0]
    assert out.dtype == np.int64


def test_derive_target_accepts_scalars():
    assert derive_target(0, 0, 0, 0, 0).tolist() == [0]
    assert derive_target(1, 0, 0, 0, 0).tolist() == [1]


def test_derive_target_rejects_negative_counts():
    with pytest.raises(ValidationError, match="non-negative"):
        derive_target(np.array([-1]), 0, 0, 0, 0)


def test_encoder_column_layout_counts_then_categorical_blocks():
    rows = [
        make_row(TIPO_ACID="QUEDA", LOCAL="RUA A"),
        make_row(TIPO_ACID="CHOQUE", LOCAL="RUA B"),
    ]
    matrix = encode(_clean(rows))
    names = matrix.column_names
    assert names[: len(COUNT_COLUMNS)] == COUNT_COLUMNS
    assert names.index("LOCAL=RUA A") < names.index("TIPO_ACID=QUEDA")
    assert names.index("TIPO_ACID=QUEDA") < names.index("TIPO_ACID=CHOQUE")


def test_encoder_blocks_are_one_hot():
    rows = [make_row(TIPO_ACID=t) for t in ("A", "B", "A", "C")]
    matrix = encode(_clean(rows))
    block = [j for j, name in enumerate(matrix.column_names) if name.startswith("TIPO_ACID=")]
    assert matrix.values[:, block].sum(axis=1).tolist() == [1.0, 1.0, 1.0, 1.0]
    hot = [matrix.column_names[block[k]] for k in np.argmax(matrix.values[:, block], axis=1)]
    assert hot == ["TIPO_ACID=A", "TIPO_ACID=B", "TIPO_ACID=A", "TIPO_ACID=C"]


def test_encoder_count_columns_pass_through():
    rows = [make_row(MOTO=2, AUTO=1), make_row(MOTO=0, AUTO=3)]
    matrix = encode(_clean(rows))
    moto = matrix.column_names.index("MOTO")
    auto = matrix.column_names.index("AUTO")
    assert matrix.values[:, moto].tolist() == [2.0, 0.0]
    assert matrix.values[:, auto].tolist() == [1.0, 3.0]


def test_encoder_unseen_category_maps_to_all_zeros():
    rows = [make_row(TIPO_ACID=t) for t in ("A", "B", "NEW")]
    clean = _clean(rows)
    enc = OneHotEncoder().fit(clean, rows=np.array([0, 1]))
    assert enc.fitted_categories["TIPO_ACID"] == ["A", "B"]
    matrix = enc.transform(clean)
    block = [j for j, name in enumerate(matrix.column_names) if name.startswith("TIPO_ACID=")]
    assert matrix.values[2, block].tolist() == [0.0, 0.0]
    assert matrix.values[0, block].tolist() == [1.0, 0.0]


def test_encoder_fit_once_apply_many_keeps_columns_stable():
    rows = [make_row(TIPO_ACID=t) for t in ("A", "B", "A", "C", "B", "A")]
    clean = _clean(rows)
    enc = OneHotEncoder().fit(clean)
    first = enc.transform(clean, rows=np.array([0, 1]))
    second = enc.transform(clean, rows=np.array([3, 5]))
    assert first.column_names == second.column_names == enc.column_names


def test_encoder_labels_come_from_casualty_columns():
    rows = [make_row(FERIDOS=1), make_row(), make_row(MORTES=1), make_row(FATAIS=0)]
    matrix = encode(_clean(rows))
    assert matrix.labels.tolist() == [1, 0, 1, 0]


def test_encoder_transform_before_fit_raises():
    clean = _clean([make_row()])
    with pytest.raises(ValidationError, match="not been fitted"):
        OneHotEncoder().transform(clean)


def test_fit_scaler_population_std_frozen_example():
    matrix = DesignMatrix(
        values=np.array([[0.0], [2.0], [4.0]]),
        column_names=["X"],
        labels=np.array([0, 1, 0]),
    )
    params = fit_scaler(matrix, np.array([0, 1, 2]))
    assert params.mean[0] == 2.0
    assert abs(params.std[0] - 1.6329931618554521) < 1e-12
    scaled = apply_scaler(matrix, params)
    expected = [-1.224744871391589, 0.0, 1.224744871391589]
    assert np.allclose(scaled.values[:, 0], expected, atol=1e-12)


def test_scaler_constant_column_maps_to_zero():
    matrix = DesignMatrix(
        values=np.array([[5.0, 1.0], [5.0, 3.0]]),
        column_names=["A", "B"],
        labels=np.array([0, 1]),
    )
    params = fit_scaler(matrix, np.array([0, 1]))
    assert params.constant_columns.tolist() == [True, False]
    other = DesignMatrix(
        values=np.array([[7.0, 2.0]]), column_names=["A", "B"], labels=np.array([1])
    )
    scaled = apply_scaler(other, params)
    assert scaled.values[0, 0] == 0.0


def test_scaler_fits_on_training_rows_only():
    matrix = DesignMatrix(
        values=np.array([[0.0], [2.0], [100.0]]),
        column_names=["X"],
        labels=np.array([0, 1, 1]),
    )
    params = fit_scaler(matrix, np.array([0, 1]))
    assert params.mean[0] == 1.0
    assert params.std[0] == 1.0
    assert params.fitted_on == 2


def test_fit_scaler_requires_two_rows():
    matrix = DesignMatrix(
        values=np.array([[1.0]]), column_names=["X"], labels=np.array([0])
    )
    with pytest.raises(ValidationError, match="at least 2"):
        fit_scaler(matrix, np.array([0]))


def test_apply_scaler_column_mismatch_raises():
    matrix = DesignMatrix(
        values=np.zeros((2, 2)), column_names=["A", "B"], labels=np.array([0, 1])
    )
    params = ScalerParams(mean=np.zeros(3), std=np.ones(3), fitted_on=2)
    with pytest.raises(ValidationError, match="columns"):
        apply_scaler(matrix, params)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_scaler_normalizes_nonconstant_columns(seed):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(20, 4)) * rng.uniform(0.5, 10.0, size=4)
    matrix = DesignMatrix(
        values=values,
        column_names=list("ABCD"),
        labels=rng.integers(0, 2, 20),
    )
    rows = np.arange(20)
    scaled = apply_scaler(matrix, fit_scaler(matrix, rows))
    assert np.allclose(scaled.values.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(scaled.values.std(axis=0), 1.0, atol=1e-12)


def test_split_is_a_seeded_partition():
    indices = split(100, 0.6, seed=0)
    assert indices.train.shape[0] == 60
    assert indices.test.shape[0] == 40
    merged = np.sort(np.concatenate([indices.train, indices.test]))
    assert np.array_equal(merged, np.arange(100))
    again = split(100, 0.6, seed=0)
    assert np.array_equal(indices.train, again.train)
    assert np.array_equal(indices.test, again.test)
    other = split(100, 0.6, seed=1)
    assert not np.array_equal(indices.train, other.train)


def test_split_sizes_use_floor():
    indices = split(20798, 0.6, seed=0)
    assert indices.train.shape[0] == 12478
    assert indices.test.shape[0] == 8320
    assert split(5, 0.6, seed=1).train.shape[0] == 3
    assert split(10, 0.75, seed=1).train.shape[0] == 7


def test_split_validation():
    with pytest.raises(ValidationError):
        split(10, 0.0, seed=0)
    with pytest.raises(ValidationError):
        split(10, 1.0, seed=0)
    with pytest.raises(ValidationError):
        split(1, 0.6, seed=0)


def test_design_matrix_csv_roundtrip_is_exact():
    rng = np.random.default_rng(5)
    matrix = DesignMatrix(
        values=rng.normal(size=(8, 3)),
        column_names=["A", "B", "C"],
        labels=rng.integers(0, 2, 8),
    )
    text = matrix.to_csv()
    assert text.splitlines()[0] == f"A,B,C,{TARGET_COLUMN}"
    back = DesignMatrix.from_csv(text)
    assert back.column_names == matrix.column_names
    assert np.array_equal(back.values, matrix.values)
    assert np.array_equal(back.labels, matrix.labels)


def test_design_matrix_csv_file_roundtrip(tmp_path):
    matrix = DesignMatrix(
        values=np.array([[0.1, 0.2]]), column_names=["A", "B"], labels=np.array([1])
    )
    path = tmp_path / "matrix.csv"
    matrix.write_csv(path)
    back = DesignMatrix.from_csv(path)
    assert np.array_equal(back.values, matrix.values)


def test_design_matrix_from_csv_requires_target_last():
    with pytest.raises(ValidationError, match=TARGET_COLUMN):
        DesignMatrix.from_csv("A,B\n1.0,2.0\n")


def test_design_matrix_shape_validation():
    with pytest.raises(ValidationError):
        DesignMatrix(values=np.zeros((2, 2)), column_names=["A"], labels=np.zeros(2))
    with pytest.raises(ValidationError):
        DesignMatrix(values=np.zeros((2, 1)), column_names=["A"], labels=np.zeros(3))
    with pytest.raises(ValidationError):
        DesignMatrix(values=np.zeros(3), column_names=["A"], labels=np.zeros(3))


def test_design_matrix_take_subsets_rows():
    matrix = DesignMatrix(
        values=np.arange(6, dtype=float).reshape(3, 2),
        column_names=["A", "B"],
        labels=np.array([0, 1, 0]),
    )
    sub = matrix.take(np.array([2, 0]))
    assert sub.values.tolist() == [[4.0, 5.0], [0.0, 1.0]]
    assert sub.labels.tolist() == [0, 0]


def test_scaler_and_split_dict_roundtrips():
    params = ScalerParams(mean=np.array([1.0]), std=np.array([2.0]), fitted_on=4)
    back = ScalerParams.from_dict(params.to_dict())
    assert np.array_equal(back.mean, params.mean)
    assert np.array_equal(back.std, params.std)
    assert back.fitted_on == 4

    indices = split(10, 0.6, seed=3)
    back = SplitIndices.from_dict(indices.to_dict())
    assert np.array_equal(back.train, indices.train)
    assert np.array_equal(back.test, indices.test)
    assert back.seed == 3 and back.train_fraction == 0.6


def test_scaler_params_reject_negative_std():
    with pytest.raises(ValidationError):
        ScalerParams(mean=np.zeros(1), std=np.array([-1.0]), fitted_on=2)
