"""
Читання та запис CSV-файлів: вибірки, результати згладжування,
крос-валідації та Монте-Карло.

Рядки, що починаються з '#', є коментарями; записувачі виводять у них
повну конфігурацію запуску (KEY=VALUE).
"""

import csv
import math
from pathlib import Path
from typing import Iterable, List, NamedTuple, Sequence

import numpy as np

from system.exceptions import SmoothingErrorCode, SmoothingException
from system.kernel_smoothing import Dataset
from tools.logger import Logger

logger = Logger()

SIGNIFICANT_DIGITS = 10


class Table(NamedTuple):
    comments: List[str]
    header: List[str]
    rows: List[List[str]]
    line_numbers: List[int]


def format_value(value) -> str:
    """Значення комірки: числа з 10 значущими цифрами, логічні як true/false."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return f"{float(value):.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def _exact(value: float) -> str:
    # найкоротше подання, що відтворює число побітово
    return repr(float(value))


def read_table(path) -> Table:
    """CSV з необов'язковими рядками-коментарями перед заголовком."""
    file_path = Path(path)
    if not file_path.is_file():
        raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, f"файл {path} не знайдено")
    comments, header, rows, numbers = [], None, [], []
    with open(file_path, newline="", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            text = line.rstrip("\r\n")
            if not text.strip():
                continue
            if text.startswith("#"):
                comments.append(text[1:].strip())
                continue
            try:
                fields = next(csv.reader([text]))
            except csv.Error as e:
                raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, str(e), line=line_no)
            fields = [field.strip() for field in fields]
            if header is None:
                header = fields
                continue
            if len(fields) != len(header):
                raise SmoothingException(
                    SmoothingErrorCode.RAGGED_ROW,
                    f"{len(fields)} полів замість {len(header)}",
                    line=line_no
                )
            rows.append(fields)
            numbers.append(line_no)
    if header is None:
        raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, "відсутній заголовок", line=1)
    return Table(comments, header, rows, numbers)


def write_table(
        path,
        header: Sequence[str],
        rows: Iterable[Sequence],
        config_lines: Sequence[str] = ()
):
    file_path = Path(path)
    if file_path.parent and not file_path.parent.exists():
        file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w", newline="", encoding="utf-8") as f:
        for line in config_lines:
            f.write(f"# {line}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([value if isinstance(value, str) else format_value(value) for value in row])
    logger.info(f"💾 Записано {file_path}")


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, f"'{text}' у стовпці {column}", line=line)
    if not math.isfinite(value):
        raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, f"'{text}' у стовпці {column}", line=line)
    return value


def dataset_header(dim: int) -> List[str]:
    return [f"x{j}" for j in range(1, dim + 1)] + ["y"]


def read_dataset(path) -> Dataset:
    """
    Вибірка x1..xD,y. Рядки замикаються на симплекс, номери рядків
    файлу зберігаються для звітів.
    """
    table = read_table(path)
    dim = len(table.header) - 1
    if dim < 2 or table.header != dataset_header(dim):
        raise SmoothingException(
            SmoothingErrorCode.PARSE_ERROR,
            f"заголовок {','.join(table.header)}; очікується x1,...,xD,y",
            line=1 + len(table.comments)
        )
    if not table.rows:
        raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, "файл не містить даних")
    covariates = np.empty((len(table.rows), dim))
    responses = np.empty(len(table.rows))
    for i, (fields, line_no) in enumerate(zip(table.rows, table.line_numbers)):
        for j in range(dim):
            value = _parse_float(fields[j], line_no, table.header[j])
            if value <= 0.0:
                raise SmoothingException(
                    SmoothingErrorCode.NON_POSITIVE_PART,
                    f"{table.header[j]}={fields[j]}",
                    line=line_no
                )
            covariates[i, j] = value
        responses[i] = _parse_float(fields[dim], line_no, "y")
    logger.info(f"📥 Прочитано {len(responses)} спостережень (D={dim}) з {path}")
    return Dataset(covariates, responses, row_numbers=table.line_numbers)


def write_dataset(path, data: Dataset, config_lines: Sequence[str] = ()):
    rows = (
        [_exact(v) for v in data.covariates[i]] + [_exact(data.responses[i])]
        for i in range(data.n)
    )
    write_table(path, dataset_header(data.dim), rows, config_lines)


def fit_header(dim: int, with_residuals: bool, ternary: bool) -> List[str]:
    """point_id, x1..xD, ilr1..ilr(D-1), [tern_x, tern_y], estimate, [residual], converged."""
    header = ["point_id"] + [f"x{j}" for j in range(1, dim + 1)] + [f"ilr{j}" for j in range(1, dim)]
    if ternary:
        header += ["tern_x", "tern_y"]
    header.append("estimate")
    if with_residuals:
        header.append("residual")
    header.append("converged")
    return header


def read_numeric_columns(path, columns: Sequence[str]) -> np.ndarray:
    """Вибрані стовпці результату як масив n x len(columns)."""
    table = read_table(path)
    missing = [c for c in columns if c not in table.header]
    if missing:
        raise SmoothingException(SmoothingErrorCode.PARSE_ERROR, f"відсутні стовпці {missing}")
    idx = [table.header.index(c) for c in columns]
    values = np.empty((len(table.rows), len(columns)))
    for i, (fields, line_no) in enumerate(zip(table.rows, table.line_numbers)):
        for k, j in enumerate(idx):
            text = fields[j]
            values[i, k] = float("nan") if text == "nan" else _parse_float(text, line_no, columns[k])
    return values


def config_from_comments(comments: Sequence[str]) -> dict:
    """Відновлення KEY=VALUE з коментарів-заголовків результату."""
    values = {}
    for comment in comments:
        key, sep, value = comment.partition("=")
        if sep:
            values[key.strip()] = value.strip()
    return values


def write_cv_result(path, result, config_lines: Sequence[str] = ()):
    header = ["h", "score", "failed_fraction", "excluded", "chosen"]
    rows = ([r[k] for k in header] for r in result.rows())
    write_table(path, header, rows, list(config_lines) + [f"PARTITION_SHA256={result.partition_hash}"])


def write_mc_reports(path, reports: Sequence, config_lines: Sequence[str] = ()):
    header = ["estimator", "scenario", "mise", "bias2", "n_failures"]
    rows = ([r[k] for k in header] for report in reports for r in report.rows())
    write_table(path, header, rows, config_lines)


def write_ise_long(path, reports: Sequence, config_lines: Sequence[str] = ()):
    """Довгий формат ISE: scenario, estimator, replication, ise."""
    rows = (
        [report.scenario, name, int(rep), float(value)]
        for report in reports
        for name in report.estimators
        for rep, value in zip(report.rep_indices[name], report.ise[name])
    )
    write_table(path, ["scenario", "estimator", "replication", "ise"], rows, config_lines)


def sibling_path(path, suffix: str) -> Path:
    """mise_bias.csv -> mise_bias_<suffix>.csv"""
    file_path = Path(path)
    return file_path.with_name(f"{file_path.stem}_{suffix}{file_path.suffix or '.csv'}")
