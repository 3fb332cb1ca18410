"""Формати CSV: вибірки, коментарі з конфігурацією, результати."""

import numpy as np
import pytest

from conftest import regression_sample
from system.exceptions import SmoothingErrorCode, SmoothingException
from tools.csv_io import (
    config_from_comments,
    fit_header,
    format_value,
    read_dataset,
    read_numeric_columns,
    read_table,
    sibling_path,
    write_dataset,
    write_table,
)


def _csv(tmp_path, text: str, name: str = "data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestReadDataset:
    def test_valid_row(self, tmp_path):
        data = read_dataset(_csv(tmp_path, "x1,x2,x3,y\n0.2,0.3,0.5,1.7\n"))
        assert data.n == 1 and data.dim == 3
        np.testing.assert_allclose(data.covariates[0], [0.2, 0.3, 0.5])
        assert data.responses[0] == 1.7

    def test_row_is_closed(self, tmp_path):
        data = read_dataset(_csv(tmp_path, "x1,x2,x3,y\n0.2,0.3,0.6,1.7\n"))
        np.testing.assert_allclose(data.covariates[0], [2 / 11, 3 / 11, 6 / 11])

    def test_zero_part_reports_line(self, tmp_path):
        path = _csv(tmp_path, "# comment\nx1,x2,x3,y\n0.2,0.3,0.5,1.7\n0.2,0,0.8,1.0\n")
        with pytest.raises(SmoothingException) as e:
            read_dataset(path)
        assert e.value.error_code == SmoothingErrorCode.NON_POSITIVE_PART
        assert e.value.line == 4

    def test_ragged_row(self, tmp_path):
        with pytest.raises(SmoothingException) as e:
            read_dataset(_csv(tmp_path, "x1,x2,y\n0.5,0.5,1\n0.5,0.5\n"))
        assert e.value.error_code == SmoothingErrorCode.RAGGED_ROW
        assert e.value.line == 3

    def test_unparsable_value(self, tmp_path):
        with pytest.raises(SmoothingException) as e:
            read_dataset(_csv(tmp_path, "x1,x2,y\n0.5,abc,1\n"))
        assert e.value.error_code == SmoothingErrorCode.PARSE_ERROR
        assert e.value.line == 2
        assert e.value.exit_code == 2

    def test_bad_header(self, tmp_path):
        with pytest.raises(SmoothingException) as e:
            read_dataset(_csv(tmp_path, "a,b,y\n0.5,0.5,1\n"))
        assert e.value.error_code == SmoothingErrorCode.PARSE_ERROR

    def test_row_numbers_are_file_lines(self, tmp_path):
        data = read_dataset(_csv(tmp_path, "x1,x2,y\n\n0.5,0.5,1\n0.4,0.6,2\n"))
        assert data.row_numbers.tolist() == [3, 4]


class TestRoundTrip:
    def test_dataset_fixpoint(self, tmp_path):
        data = regression_sample(20, seed=1)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_dataset(first, data, ["SEED=1"])
        write_dataset(second, read_dataset(first), ["SEED=1"])
        assert first.read_bytes() == second.read_bytes()

    def test_values_survive(self, tmp_path):
        data = regression_sample(10, seed=2)
        path = tmp_path / "a.csv"
        write_dataset(path, data)
        again = read_dataset(path)
        np.testing.assert_array_equal(again.responses, data.responses)
        np.testing.assert_allclose(again.covariates, data.covariates, rtol=1e-15)

    def test_result_table_fixpoint(self, tmp_path):
        first = tmp_path / "r.csv"
        write_table(first, ["h", "score", "chosen"], [[0.1, 1 / 3, False], [0.2, np.nan, True]], ["A=1"])
        table = read_table(first)
        second = tmp_path / "s.csv"
        write_table(second, table.header, table.rows, table.comments)
        assert first.read_bytes() == second.read_bytes()


class TestFormats:
    def test_format_value(self):
        assert format_value(1 / 3) == "0.3333333333"
        assert format_value(True) == "true"
        assert format_value(np.int64(4)) == "4"
        assert format_value(float("nan")) == "nan"

    def test_comments_carry_config(self, tmp_path):
        path = tmp_path / "r.csv"
        write_table(path, ["a"], [[1]], ["SEED=5", "METHOD=rob1"])
        assert config_from_comments(read_table(path).comments) == {"SEED": "5", "METHOD": "rob1"}

    def test_fit_header(self):
        assert fit_header(3, with_residuals=True, ternary=False) == [
            "point_id", "x1", "x2", "x3", "ilr1", "ilr2", "estimate", "residual", "converged"
        ]
        assert "tern_x" in fit_header(3, with_residuals=False, ternary=True)

    def test_numeric_columns_keep_nan(self, tmp_path):
        path = tmp_path / "r.csv"
        write_table(path, ["a", "b"], [[1.5, np.nan], [2.0, 3.0]])
        values = read_numeric_columns(path, ["b"])
        assert np.isnan(values[0, 0]) and values[1, 0] == 3.0

    def test_sibling_path(self, tmp_path):
        assert sibling_path(tmp_path / "fit.csv", "grid").name == "fit_grid.csv"
