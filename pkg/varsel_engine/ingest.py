"""
Delimited-text ingestion with the wine-quality and cardiotocography transforms.
"""
import logging
import os
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from .models import Dataset

logger = logging.getLogger(__name__)

WINE_GOOD_QUALITY = 7

# Predictors documented for the cardiotocography data, in legend order.
CTG_PREDICTORS = (
    "LB", "AC", "FM", "UC", "DL", "DS", "DP", "ASTV", "MSTV", "ALTV", "MLTV",
    "Width", "Min", "Max", "Nmax", "Nzeros", "Mode", "Mean", "Median", "Variance", "Tendency",
)
CTG_DROPPED = ("Mean", "Median", "Max")
CTG_LABELS = {
    "1": "normal", "normal": "normal", "n": "normal",
    "2": "suspect", "suspect": "suspect", "s": "suspect",
    "3": "pathologic", "pathologic": "pathologic", "pathological": "pathologic", "p": "pathologic",
}

_TRANSFORM_DEFAULTS = {
    # transform: (delimiter, response column, standardize)
    "none": (",", "y", False),
    "wine_white": (";", "quality", True),
    "ctg_binary": (",", "NSP", False),
}


class DatasetError(ValueError):
    """Raised when a data file cannot be turned into a Dataset."""
    pass


class IngestSpec(BaseModel):
    """
    Where and how to load a dataset; the `[data]` config section.

    Unset delimiter, response column and standardize flag take the
    transform's defaults (wine: ';', quality, standardized; ctg: ',', NSP,
    raw; none: ',', y, raw).
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    path: str
    delimiter: Optional[str] = Field(None, min_length=1)
    response_column: Optional[str] = None
    transform: Literal["none", "wine_white", "ctg_binary"] = "none"
    standardize: Optional[bool] = None
    drop_columns: list[str] = Field(default_factory=list)
    suspect_as_abnormal: bool = True

    @property
    def resolved_delimiter(self) -> str:
        return self.delimiter or _TRANSFORM_DEFAULTS[self.transform][0]

    @property
    def resolved_response(self) -> str:
        return self.response_column or _TRANSFORM_DEFAULTS[self.transform][1]

    @property
    def resolved_standardize(self) -> bool:
        if self.standardize is None:
            return _TRANSFORM_DEFAULTS[self.transform][2]
        return self.standardize


def normalize_header(name: str) -> str:
    """'fixed acidity' -> 'fixed.acidity'."""
    return ".".join(str(name).strip().strip('"').split())


def _find_column(frame: pd.DataFrame, name: str) -> str:
    if name in frame.columns:
        return name
    matches = [c for c in frame.columns if c.lower() == name.lower()]
    if len(matches) == 1:
        return matches[0]
    raise DatasetError(f"Column '{name}' not found; available: {list(frame.columns)}")


def _numeric_block(frame: pd.DataFrame, columns: list[str]) -> np.ndarray:
    """Parse the given string columns, listing every unparseable cell by file line."""
    problems = []
    for column in columns:
        values = frame[column].str.strip()
        parsed = pd.to_numeric(values, errors="coerce")
        bad = parsed.isna() | ~np.isfinite(parsed.fillna(0.0))
        for row in np.flatnonzero(bad.to_numpy())[:20]:
            problems.append(f"line {row + 2}, column '{column}': {values.iloc[row]!r}")
    if problems:
        raise DatasetError("Unparseable values:\n  " + "\n  ".join(problems))
    # numpy parses each string with float(), so written values round-trip exactly
    return frame[columns].apply(lambda s: s.str.strip()).to_numpy().astype(np.float64)


def wine_transform(quality) -> np.ndarray:
    """y = 1 iff the quality score is at least 7."""
    scores = np.asarray(quality, dtype=np.float64)
    if scores.size and (np.any(scores != np.round(scores)) or scores.min() < 0 or scores.max() > 10):
        bad = scores[(scores != np.round(scores)) | (scores < 0) | (scores > 10)]
        raise DatasetError(f"Wine quality must be an integer in 0..10, got {bad[:5].tolist()}")
    return (scores >= WINE_GOOD_QUALITY).astype(np.int8)


def ctg_label(value: str, suspect_as_abnormal: bool = True) -> int:
    """Fetal-state class (1/2/3 or normal/suspect/pathologic) as 0 normal, 1 abnormal."""
    key = str(value).strip().lower()
    if key.endswith(".0"):
        key = key[:-2]
    if key not in CTG_LABELS:
        raise DatasetError(f"Unknown fetal-state class '{value}'")
    state = CTG_LABELS[key]
    if state == "suspect":
        return int(suspect_as_abnormal)
    return int(state == "pathologic")


def ctg_transform(
    frame: pd.DataFrame,
    response_column: str = "NSP",
    suspect_as_abnormal: bool = True
) -> tuple[pd.DataFrame, np.ndarray]:
    """
    Keep the 18 legend predictors (dropping Mean, Median and Max) and collapse
    the fetal state to normal (0) versus suspect or pathologic (1).
    """
    response = _find_column(frame, response_column)
    try:
        columns = [_find_column(frame, name) for name in CTG_PREDICTORS]
    except DatasetError as e:
        raise DatasetError(f"Not a cardiotocography table: {e}")
    dropped = {name.lower() for name in CTG_DROPPED}
    kept = [c for c in columns if c.lower() not in dropped]
    labels = np.array(
        [ctg_label(v, suspect_as_abnormal) for v in frame[response]], dtype=np.int8
    )
    return frame[kept], labels


def read_table(path: str, delimiter: str) -> pd.DataFrame:
    if not os.path.isfile(path):
        raise DatasetError(f"Data file not found: {path}")
    try:
        frame = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DatasetError(f"Could not parse {path}: {e}")
    frame.columns = [normalize_header(c) for c in frame.columns]
    if frame.columns.duplicated().any():
        raise DatasetError(f"Duplicate column names in {path}: {list(frame.columns)}")
    return frame


def load_delimited(spec: IngestSpec) -> Dataset:
    """
    Load a headed delimited file into a Dataset.

    Raises:
        DatasetError: Missing file or column, unparseable values (with line
            numbers) or a response that is not binary after the transform
    """
    frame = read_table(spec.path, spec.resolved_delimiter)
    if frame.empty:
        raise DatasetError(f"{spec.path} has a header but no rows")

    for name in spec.drop_columns:
        frame = frame.drop(columns=[_find_column(frame, normalize_header(name))])

    response_name = _find_column(frame, normalize_header(spec.resolved_response))
    if spec.transform == "ctg_binary":
        predictors, response = ctg_transform(frame, response_name, spec.suspect_as_abnormal)
        columns = list(predictors.columns)
    else:
        columns = [c for c in frame.columns if c != response_name]
        raw = _numeric_block(frame, [response_name])[:, 0]
        if spec.transform == "wine_white":
            response = wine_transform(raw)
        else:
            if not np.all(np.isin(raw, (0.0, 1.0))):
                raise DatasetError(
                    f"Response '{response_name}' is not binary: values {np.unique(raw)[:10].tolist()}"
                )
            response = raw.astype(np.int8)

    if not columns:
        raise DatasetError(f"{spec.path} has no predictor columns")
    matrix = _numeric_block(frame, columns)
    try:
        dataset = Dataset(
            main_matrix=matrix,
            response=response,
            column_names=tuple(columns),
            standardized=spec.resolved_standardize,
        )
    except ValueError as e:
        raise DatasetError(str(e))

    logger.info(
        "Loaded %s: %d rows, %d predictors, positive rate %.3f",
        spec.path, dataset.n_rows, dataset.n_main, dataset.positive_rate
    )
    return dataset
