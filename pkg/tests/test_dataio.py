import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from groupseg.dataio import (
    IngestError,
    atomic_write_text,
    load_manifest,
    read_window_csv,
    write_dataset,
    write_window_csv,
)


def test_read_simple(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("a,b\n1,2\n3.5,-4e-1\n")
    names, data = read_window_csv(p)
    assert names == ["a", "b"]
    assert data.tolist() == [[1.0, 2.0], [3.5, -0.4]]


@pytest.mark.parametrize("body,fragment", [
    ("a,b\n1,2\n3,x\n", "row 2, column 2"),
    ("a,b\n1,nan\n", "row 1, column 2: non-finite"),
    ("a,b\n1,2,3\n", "row 1 has 3 columns"),
    ("a,b\n", "no data rows"),
    ("", "empty file"),
])
def test_read_errors_name_position(tmp_path, body, fragment):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(IngestError, match=fragment) as info:
        read_window_csv(p)
    assert "bad.csv" in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(IngestError, match="not found"):
        read_window_csv(tmp_path / "nope.csv")
    with pytest.raises(IngestError, match="manifest not found"):
        load_manifest(tmp_path / "nope.json")


def test_manifest_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    w = rng.normal(size=(3, 5, 2))
    m = write_dataset(tmp_path, w, ["u", "v"], labels=[0.0, 1.0, 2.5])
    ds = load_manifest(m)
    assert np.array_equal(ds.windows, w)
    assert ds.variable_names == ("u", "v") and ds.T == 5 and ds.D == 2
    assert ds.labels.tolist() == [0.0, 1.0, 2.5]


def test_mixed_dimensions_rejected(tmp_path):
    write_window_csv(tmp_path / "a.csv", np.zeros((4, 2)), ["u", "v"])
    write_window_csv(tmp_path / "b.csv", np.zeros((4, 3)), ["u", "v", "w"])
    meta = {"windows": ["a.csv", "b.csv"], "variable_names": ["u", "v"], "T": 4, "D": 2}
    (tmp_path / "m.json").write_text(json.dumps(meta))
    with pytest.raises(IngestError, match="b.csv: 3 columns"):
        load_manifest(tmp_path / "m.json")


def test_manifest_field_checks(tmp_path):
    write_window_csv(tmp_path / "a.csv", np.zeros((4, 2)), ["u", "v"])
    base = {"windows": ["a.csv"], "variable_names": ["u", "v"], "T": 4, "D": 2}
    cases = [
        ({k: v for k, v in base.items() if k != "T"}, "missing field 'T'"),
        ({**base, "T": 5}, "4 rows, manifest says T=5"),
        ({**base, "variable_names": ["u", "z"]}, "does not match"),
        ({**base, "variable_names": ["u"]}, "1 variable names but D=2"),
        ({**base, "windows": []}, "no windows"),
        ({**base, "labels": [1, 2]}, "2 labels for 1 windows"),
    ]
    for meta, fragment in cases:
        (tmp_path / "m.json").write_text(json.dumps(meta))
        with pytest.raises(IngestError, match=fragment):
            load_manifest(tmp_path / "m.json")
    (tmp_path / "m.json").write_text("{broken")
    with pytest.raises(IngestError, match="invalid JSON"):
        load_manifest(tmp_path / "m.json")


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 4)),
              elements=st.floats(-1e12, 1e12, allow_nan=False)))
def test_csv_roundtrip_exact(tmp_path_factory, x):
    p = tmp_path_factory.mktemp("rt") / "w.csv"
    names = [f"v{j}" for j in range(x.shape[1])]
    write_window_csv(p, x, names)
    got_names, got = read_window_csv(p)
    assert got_names == names and np.array_equal(got, x)


def test_atomic_write_leaves_no_temp(tmp_path):
    atomic_write_text(tmp_path / "sub" / "out.txt", "hello\n")
    assert (tmp_path / "sub" / "out.txt").read_text() == "hello\n"
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["out.txt"]
