import logging
import re
from pathlib import Path
from typing import IO, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import yaml

from models.dataset import Dataset
from schemas.ingest import PRESETS, IngestSchema, LoadReport, MissingPolicy
from services.exceptions import EmptyAfterFiltering, IoError, MissingColumn, UnparseableRow

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Source = Union[str, Path, IO[str]]

_PARSER_LINE = re.compile(r"line (\d+)")

# Row i of the frame sits on file line i + 2 (line 1 is the header)
_FIRST_DATA_LINE = 2


def resolve_schema(name_or_path: Optional[str], data_path: Optional[PathLike] = None) -> IngestSchema:
    """
    A preset name, a YAML file of IngestSchema fields, or (when None) a
    schema inferred from the header of a generated dataset CSV.
    """
    if name_or_path is None:
        if data_path is None:
            raise ValueError("no schema given and no data file to infer one from")
        return infer_schema(data_path)
    key = name_or_path.strip().lower()
    if key in PRESETS:
        return PRESETS[key]

    path = Path(name_or_path)
    if not path.is_file():
        raise ValueError(f"Unknown schema '{name_or_path}'; use a preset {sorted(PRESETS)} or a YAML file")
    try:
        with path.open("r", encoding="utf-8") as f:
            fields = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise IoError(f"cannot read schema file {path}: {exc}") from exc
    return IngestSchema(**fields)


def infer_schema(path: PathLike) -> IngestSchema:
    """Columns S and Y plus numeric features, as written by write_dataset_csv"""
    header = _read_frame(path, nrows=0).columns.tolist()
    for column in ("S", "Y"):
        if column not in header:
            raise MissingColumn(column)
    return IngestSchema(
        target_column="Y",
        target_positive="1",
        sensitive_column="S",
        sensitive_minority="0",
        numeric_columns=[c for c in header if c not in ("S", "Y")],
    )


def _read_frame(path: Source, nrows: Optional[int] = None) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            encoding="utf-8",
            nrows=nrows,
        )
    except pd.errors.ParserError as exc:
        match = _PARSER_LINE.search(str(exc))
        raise UnparseableRow(int(match.group(1)) if match else 0, str(exc)) from exc
    except (OSError, UnicodeDecodeError, pd.errors.EmptyDataError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _one_hot(values: pd.Series, column: str) -> Tuple[np.ndarray, List[str]]:
    """One indicator column per distinct value, in sorted order"""
    categories = sorted(values.unique())
    encoded = np.column_stack([(values == c).to_numpy(dtype=np.float64) for c in categories])
    return encoded, [f"{column}={c}" for c in categories]


def load_csv_with_report(path: Source, schema: IngestSchema) -> Tuple[Dataset, LoadReport]:
    """
    Parse, filter and encode a CSV file.

    Rows missing the target or sensitive value are always dropped. Other
    missing cells are dropped or replaced by the column mode per the schema.
    Unparseable numeric cells drop the row under drop_row and raise under
    impute_mode.
    """
    frame = _read_frame(path)
    for column in schema.required_columns:
        if column not in frame.columns:
            raise MissingColumn(column)

    frame = frame[schema.required_columns].apply(lambda col: col.str.strip())
    rows_read = len(frame)
    lines = np.arange(rows_read) + _FIRST_DATA_LINE
    missing = frame.isin(schema.missing_values)

    keep = ~(missing[schema.target_column] | missing[schema.sensitive_column])

    numeric = {}
    for column in schema.numeric_columns:
        parsed = pd.to_numeric(frame[column].where(~missing[column]), errors="coerce")
        bad = parsed.isna() & ~missing[column]
        if bad.any():
            if schema.missing_policy == MissingPolicy.impute_mode:
                first = int(np.flatnonzero(bad.to_numpy())[0])
                raise UnparseableRow(int(lines[first]), f"{column}={frame[column].iloc[first]!r} is not a number")
            keep &= ~bad
        numeric[column] = parsed

    if schema.missing_policy == MissingPolicy.drop_row:
        keep &= ~missing[schema.numeric_columns + schema.categorical_columns].any(axis=1)

    keep_mask = keep.to_numpy()
    dropped_lines = [int(line) for line in lines[~keep_mask]]
    frame = frame[keep_mask].reset_index(drop=True)
    missing = missing[keep_mask].reset_index(drop=True)
    if frame.empty:
        raise EmptyAfterFiltering(f"no rows of {path} survive filtering")

    imputed_cells = 0
    blocks, names = [], []
    for column in schema.numeric_columns:
        values = numeric[column][keep_mask].reset_index(drop=True)
        gaps = values.isna()
        if gaps.any():
            modes = values.mode(dropna=True)
            if modes.empty:
                raise EmptyAfterFiltering(f"numeric column {column} has no values to impute from")
            values = values.fillna(modes.iloc[0])
            imputed_cells += int(gaps.sum())
        blocks.append(values.to_numpy(dtype=np.float64)[:, None])
        names.append(column)

    for column in schema.categorical_columns:
        values = frame[column]
        gaps = missing[column]
        if gaps.any():
            modes = values[~gaps].mode(dropna=True)
            if modes.empty:
                raise EmptyAfterFiltering(f"categorical column {column} has no values to impute from")
            values = values.where(~gaps, modes.iloc[0])
            imputed_cells += int(gaps.sum())
        encoded, encoded_names = _one_hot(values, column)
        blocks.append(encoded)
        names.extend(encoded_names)

    target_raw = frame[schema.target_column]
    if schema.strip_trailing_dot:
        target_raw = target_raw.str.rstrip(".")
    target = (target_raw == schema.target_positive).to_numpy(dtype=np.int8)

    sensitive_raw = frame[schema.sensitive_column]
    if schema.sensitive_minority is not None:
        sensitive = (sensitive_raw != schema.sensitive_minority).to_numpy(dtype=np.int8)
    else:
        sensitive = (sensitive_raw == schema.sensitive_majority).to_numpy(dtype=np.int8)

    features = np.hstack(blocks) if blocks else np.empty((len(frame), 0))
    dataset = Dataset(features=features, target=target, sensitive=sensitive, feature_names=tuple(names))
    report = LoadReport(
        path=str(path) if isinstance(path, (str, Path)) else "<upload>",
        rows_read=rows_read,
        rows_kept=dataset.n,
        rows_dropped=len(dropped_lines),
        dropped_lines=dropped_lines,
        imputed_cells=imputed_cells,
        positive_share=dataset.positive_rate(),
        minority_share=dataset.minority_share(),
    )
    return dataset, report


def load_csv(path: Source, schema: IngestSchema) -> Dataset:
    dataset, report = load_csv_with_report(path, schema)
    logger.info(
        f"Loaded {report.path}: kept {report.rows_kept}/{report.rows_read} rows, "
        f"imputed {report.imputed_cells} cells, positive share {report.positive_share:.3f}, "
        f"minority share {report.minority_share:.3f}"
    )
    if report.dropped_lines:
        shown = ", ".join(str(line) for line in report.dropped_lines[:10])
        more = "" if len(report.dropped_lines) <= 10 else f" (+{len(report.dropped_lines) - 10} more)"
        logger.warning(f"Dropped {report.rows_dropped} rows at lines {shown}{more}")
    return dataset


def _format_value(value: float) -> str:
    return repr(float(value))


def dataset_frame(d: Dataset) -> pd.DataFrame:
    """Features, then S, then Y, as text; the layout infer_schema reads back"""
    columns = {name: [_format_value(v) for v in d.features[:, j]] for j, name in enumerate(d.feature_names)}
    columns["S"] = [str(int(v)) for v in d.sensitive]
    columns["Y"] = [str(int(v)) for v in d.target]
    return pd.DataFrame(columns, columns=[*d.feature_names, "S", "Y"])


def dataset_csv_text(d: Dataset) -> str:
    return dataset_frame(d).to_csv(index=False, lineterminator="\r\n")


def write_dataset_csv(d: Dataset, path: PathLike) -> None:
    frame = dataset_frame(d)
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\r\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    logger.info(f"Wrote {d.n} rows to {path}")
