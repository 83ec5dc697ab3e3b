import numpy as np
import numpy.testing as npt
import pytest

from covariance.covest import FunctionalDataset
from covariance.errors import DataError, InvalidParameterError
from datamanager.dataset_loader import grid_domain, load_dataset, parse_domain, save_dataset


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_plain_matrix(tmp_path):
    data = load_dataset(write(tmp_path, "1,2,3\n4,5,6\n\n"))
    npt.assert_allclose(data.Y, [[1, 2, 3], [4, 5, 6]])
    assert data.domain is None


def test_load_with_grid_header(tmp_path):
    header = ",".join(repr(float(x)) for x in np.linspace(1100, 2498, 20))
    rows = "\n".join(",".join(["1.0"] * 20) for _ in range(3))
    data = load_dataset(write(tmp_path, f"{header}\n{rows}\n"), grid_header=True)
    delta = 1398 / 19
    assert data.domain == (pytest.approx(1100 - delta), pytest.approx(2498))
    assert data.lag_scale == pytest.approx(1398 + delta)
    npt.assert_allclose(data.original_grid, np.linspace(1100, 2498, 20))


def test_load_with_explicit_domain(tmp_path):
    data = load_dataset(write(tmp_path, "1,2\n3,4\n"), domain=(0.0, 5.0))
    assert data.lag_scale == 5.0


@pytest.mark.parametrize("text, message", [
    ("1,2,3\n4,5\n", "ragged row 2"),
    ("1,2\n3,abc\n", "non-numeric value 'abc' at row 2, column 2"),
    ("1,NA\n3,4\n", "missing value at row 1, column 2"),
    ("1,inf\n3,4\n", "non-finite"),
    ("1,2\n", "at least 2 trajectories"),
    ("\n\n", "no observation rows"),
])
def test_malformed_files(tmp_path, text, message):
    with pytest.raises(DataError, match=message):
        load_dataset(write(tmp_path, text))


def test_bad_grid_headers(tmp_path):
    with pytest.raises(DataError, match="equally spaced"):
        load_dataset(write(tmp_path, "0,1,3\n1,2,3\n1,2,3\n"), grid_header=True)
    with pytest.raises(DataError, match="increasing"):
        load_dataset(write(tmp_path, "2,1,0\n1,2,3\n1,2,3\n"), grid_header=True)
    with pytest.raises(DataError, match="grid header has 2 points"):
        load_dataset(write(tmp_path, "0,1\n1,2,3\n1,2,3\n"), grid_header=True)


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="cannot read"):
        load_dataset(tmp_path / "absent.csv")


def test_header_and_domain_are_exclusive(tmp_path):
    with pytest.raises(InvalidParameterError):
        load_dataset(write(tmp_path, "1,2\n3,4\n"), grid_header=True, domain=(0, 1))


def test_grid_domain():
    assert grid_domain([1.0, 2.0, 3.0]) == (0.0, 3.0)
    with pytest.raises(DataError):
        grid_domain([1.0])


@pytest.mark.parametrize("text, expected", [("0,1", (0.0, 1.0)), (" 1100 , 2498 ", (1100.0, 2498.0))])
def test_parse_domain(text, expected):
    assert parse_domain(text) == expected


@pytest.mark.parametrize("text", ["1", "a,b", "2,1", "0,1,2"])
def test_parse_domain_rejects(text):
    with pytest.raises(InvalidParameterError):
        parse_domain(text)


def test_saved_dataset_loads_back_exactly(tmp_path):
    rng = np.random.default_rng(0)
    data = FunctionalDataset(Y=rng.standard_normal((4, 6)), domain=(2.0, 8.0))
    path = tmp_path / "saved.csv"
    save_dataset(path, data, grid_header=True)
    loaded = load_dataset(path, grid_header=True)
    npt.assert_array_equal(loaded.Y, data.Y)
    assert loaded.domain == (pytest.approx(2.0), pytest.approx(8.0))
