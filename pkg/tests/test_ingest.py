"""
Tests for delimited-text loading and the dataset transforms.
"""
import numpy as np
import pandas as pd
import pytest

from varsel_engine.generator import SimSpec, generate, write_dataset
from varsel_engine.ingest import (
    CTG_PREDICTORS,
    DatasetError,
    IngestSpec,
    ctg_label,
    ctg_transform,
    load_delimited,
    normalize_header,
    wine_transform,
)
from varsel_engine.seed_data import CTG_PREDICTORS as CTG_KEPT
from varsel_engine.seed_data import WINE_PREDICTORS


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# -- plain files --------------------------------------------------------------------

def test_three_row_file(tmp_path):
    path = _write(tmp_path, "a,b,y\n1.5,2,0\n-3,4e-1,1\n0,0,0\n")
    dataset = load_delimited(IngestSpec(path=path))
    assert dataset.n_rows == 3
    assert dataset.n_main == 2
    assert dataset.column_names == ("a", "b")
    assert dataset.response.tolist() == [0, 1, 0]
    assert dataset.main_matrix[1].tolist() == [-3.0, 0.4]
    assert dataset.standardized is False


def test_custom_delimiter_response_and_drop(tmp_path):
    path = _write(tmp_path, "id|x|label|z\n1|0.5|1|2\n2|0.1|0|3\n")
    spec = IngestSpec(path=path, delimiter="|", response_column="label", drop_columns=["id"], standardize=True)
    dataset = load_delimited(spec)
    assert dataset.column_names == ("x", "z")
    assert dataset.standardized is True


def test_unparseable_values_report_lines(tmp_path):
    path = _write(tmp_path, "a,b,y\n1,2,0\n3,oops,1\n,5,0\n")
    with pytest.raises(DatasetError) as excinfo:
        load_delimited(IngestSpec(path=path))
    message = str(excinfo.value)
    assert "line 3, column 'b'" in message
    assert "line 4, column 'a'" in message


def test_missing_file_and_column(tmp_path):
    with pytest.raises(DatasetError, match="not found"):
        load_delimited(IngestSpec(path=str(tmp_path / "absent.csv")))
    path = _write(tmp_path, "a,b\n1,0\n")
    with pytest.raises(DatasetError, match="'y' not found"):
        load_delimited(IngestSpec(path=path))
    with pytest.raises(DatasetError):
        load_delimited(IngestSpec(path=path, response_column="b", drop_columns=["c"]))


def test_non_binary_response_rejected(tmp_path):
    path = _write(tmp_path, "a,y\n1,0\n2,2\n")
    with pytest.raises(DatasetError, match="not binary"):
        load_delimited(IngestSpec(path=path))


def test_header_only_rejected(tmp_path):
    with pytest.raises(DatasetError):
        load_delimited(IngestSpec(path=_write(tmp_path, "a,y\n")))


def test_generated_dataset_round_trips_exactly(tmp_path):
    result = generate(SimSpec(n_main=4, n_samples=250, n_true=3, rng_seed=17))
    path = str(tmp_path / "sim.csv")
    write_dataset(result.dataset, path)
    loaded = load_delimited(IngestSpec(path=path))
    assert np.array_equal(loaded.main_matrix, result.dataset.main_matrix)
    assert np.array_equal(loaded.response, result.dataset.response)
    assert loaded.column_names == result.dataset.column_names


def test_normalize_header():
    assert normalize_header("fixed acidity") == "fixed.acidity"
    assert normalize_header(' "free  sulfur dioxide" ') == "free.sulfur.dioxide"


# -- wine ----------------------------------------------------------------------------

@pytest.mark.parametrize("quality, expected", [(7, 1), (6, 0), (10, 1), (0, 0)])
def test_wine_transform(quality, expected):
    assert wine_transform([quality]).tolist() == [expected]


@pytest.mark.parametrize("quality", [11, -1, 6.5])
def test_wine_transform_rejects_bad_scores(quality):
    with pytest.raises(DatasetError):
        wine_transform([quality])


def test_wine_file_layout(tmp_path):
    header = ";".join(f'"{name.replace(".", " ")}"' for name in WINE_PREDICTORS) + ';"quality"\n'
    rows = "".join(";".join(["1.0"] * 11) + f";{q}\n" for q in (5, 7, 8, 6))
    dataset = load_delimited(IngestSpec(path=_write(tmp_path, header + rows), transform="wine_white"))
    assert dataset.n_main == 11
    assert dataset.column_names == tuple(WINE_PREDICTORS)
    assert dataset.response.tolist() == [0, 1, 1, 0]
    assert dataset.standardized is True


# -- cardiotocography ---------------------------------------------------------------------

@pytest.mark.parametrize("label, expected", [
    ("normal", 0), ("1", 0), ("pathologic", 1), ("3.0", 1), ("suspect", 1), ("S", 1),
])
def test_ctg_label(label, expected):
    assert ctg_label(label) == expected


def test_ctg_label_suspect_override_and_unknown():
    assert ctg_label("suspect", suspect_as_abnormal=False) == 0
    with pytest.raises(DatasetError):
        ctg_label("4")


def _ctg_frame(labels):
    data = {name: [str(i) for i in range(len(labels))] for name in CTG_PREDICTORS}
    data["FileName"] = ["f"] * len(labels)
    data["NSP"] = labels
    return pd.DataFrame(data)


def test_ctg_transform_drops_summary_columns():
    predictors, labels = ctg_transform(_ctg_frame(["1", "2", "3"]))
    assert len(predictors.columns) == 21 - 3 == 18
    assert tuple(predictors.columns) == tuple(CTG_KEPT)
    assert labels.tolist() == [0, 1, 1]


def test_ctg_transform_requires_legend_columns():
    frame = _ctg_frame(["1"]).drop(columns=["ASTV"])
    with pytest.raises(DatasetError, match="cardiotocography"):
        ctg_transform(frame)


def test_ctg_file(tmp_path):
    frame = _ctg_frame(["1", "1", "3", "2"])
    path = str(tmp_path / "ctg.csv")
    frame.to_csv(path, index=False)
    dataset = load_delimited(IngestSpec(path=path, transform="ctg_binary"))
    assert dataset.n_main == 18
    assert dataset.response.tolist() == [0, 0, 1, 1]
    assert dataset.standardized is False


# -- published datasets (skipped unless the files are present) ------------------------------

def test_wine_white_totals(wine_path):
    dataset = load_delimited(IngestSpec(path=wine_path, transform="wine_white"))
    assert (dataset.n_rows, dataset.n_main) == (4898, 11)


def test_ctg_totals(ctg_path):
    dataset = load_delimited(IngestSpec(path=ctg_path, transform="ctg_binary"))
    assert (dataset.n_rows, dataset.n_main) == (2126, 18)
