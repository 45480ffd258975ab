import unittest

import numpy as np
import pytest

from somkit.dataset import DataMatrix, QualitativeColumn, Standardization, standardize
from somkit.errors import DegenerateDataError, MissingDataError, ValidationError

NaN = float("nan")


class StandardizeTests(unittest.TestCase):
    def test_center_subtracts_the_mean(self) -> None:
        data = DataMatrix.from_array([[1.0], [2.0], [3.0]])
        out, transform = standardize(data, "center")
        np.testing.assert_allclose(out.values[:, 0], [-1.0, 0.0, 1.0])
        self.assertEqual(transform.means[0], 2.0)

    def test_center_uses_present_entries_only(self) -> None:
        data = DataMatrix.from_array([[0.0, 1.0], [NaN, 2.0]])
        out, transform = standardize(data, "center")
        self.assertEqual(transform.means[0], 0.0)
        self.assertEqual(out.values[0, 0], 0.0)
        self.assertTrue(out.missing[1, 0])

    def test_zscore_rejects_constant_column_by_name(self) -> None:
        data = DataMatrix.from_array([[1.0, 1.0], [1.0, 2.0]], col_labels=["flat", "ok"])
        with self.assertRaises(DegenerateDataError) as ctx:
            standardize(data, "zscore")
        self.assertIn("flat", str(ctx.exception))

    def test_zscore_gives_zero_mean_unit_std(self) -> None:
        rng = np.random.default_rng(0)
        values = rng.normal(3.0, 2.0, size=(40, 3))
        values[5, 1] = NaN
        out, _ = standardize(DataMatrix.from_array(values), "zscore")
        for j in range(3):
            column = out.values[~out.missing[:, j], j]
            self.assertAlmostEqual(column.mean(), 0.0, delta=1e-9)
            self.assertAlmostEqual(column.std(), 1.0, delta=1e-9)

    def test_none_is_identity(self) -> None:
        data = DataMatrix.from_array([[1.0, 2.0], [3.0, 4.0]])
        out, transform = standardize(data, "none")
        self.assertIs(out, data)
        self.assertEqual(transform.mode, "none")

    def test_inverse_recovers_input(self) -> None:
        values = np.random.default_rng(1).uniform(-5, 5, size=(20, 4))
        data = DataMatrix.from_array(values)
        out, transform = standardize(data, "zscore")
        np.testing.assert_allclose(transform.inverse(out).values, values, atol=1e-9)

    def test_transform_survives_dict_round_trip(self) -> None:
        data = DataMatrix.from_array(np.random.default_rng(2).normal(size=(10, 2)))
        _, transform = standardize(data, "zscore")
        again = Standardization.from_dict(transform.to_dict())
        np.testing.assert_array_equal(again.means, transform.means)
        np.testing.assert_array_equal(again.stds, transform.stds)


def test_nan_marks_missing_entries():
    data = DataMatrix.from_array([[1.0, NaN], [2.0, 3.0]])
    assert data.has_missing
    assert data.missing.tolist() == [[False, True], [False, False]]
    assert data.complete().n_rows == 1


def test_row_without_present_component_is_rejected():
    with pytest.raises(MissingDataError):
        DataMatrix.from_array([[NaN, NaN], [1.0, 2.0]])


def test_entirely_missing_column_is_rejected():
    with pytest.raises(MissingDataError):
        DataMatrix.from_array([[1.0, NaN], [2.0, NaN]])


def test_data_matrix_is_read_only():
    data = DataMatrix.from_array([[1.0, 2.0]])
    with pytest.raises(ValueError):
        data.values[0, 0] = 5.0


def test_qualitative_levels_follow_first_appearance():
    column = QualitativeColumn.from_values("q", ["x", "y", "x"])
    assert column.level_names == ("x", "y")
    assert column.codes.tolist() == [0, 1, 0]
    assert column.counts().tolist() == [2, 1]


def test_qualitative_missing_answer_is_minus_one():
    column = QualitativeColumn.from_values("q", ["a", None, "b"])
    assert column.codes.tolist() == [0, -1, 1]
    assert column.missing.tolist() == [False, True, False]


def test_qualitative_needs_two_levels():
    with pytest.raises(ValidationError):
        QualitativeColumn.from_values("q", ["a", "a"])
