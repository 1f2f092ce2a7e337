import math

import pytest
from numpy.testing import assert_allclose

from src.core.db import ScanStore
from src.core.table import ARTIFACT_VERSION, ScanTable


def _table():
    return ScanTable.from_rows(
        ["g", "T", "P_z"],
        [(0.0, 0.5, 0.1234567890123456789), (0.2, 1.0, -0.75), (0.2, 1.5, math.pi / 7)],
        {"g": "1", "T": "pi/muB", "P_z": "1"},
        {"subcommand": "pz-scan", "theta": math.pi / 2},
    )


def test_table_requires_units():
    with pytest.raises(ValueError):
        ScanTable.from_rows(["a", "b"], [(1, 2)], {"a": "1"})


def test_table_rejects_ragged_rows():
    with pytest.raises(ValueError):
        ScanTable.from_rows(["a", "b"], [(1, 2), (3,)], {"a": "1", "b": "1"})


def test_csv_header_and_precision(tmp_path):
    table = _table()
    path = table.to_csv(tmp_path / "out" / "scan.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "# subcommand = pz-scan"
    assert f"# version = {ARTIFACT_VERSION}" in lines
    assert lines[3] == "# units: g=1; T=pi/muB; P_z=1"
    assert lines[4] == "g,T,P_z"
    loaded = ScanTable.read_csv(path)
    assert loaded.columns == table.columns
    assert loaded.units == table.units
    assert loaded.provenance["subcommand"] == "pz-scan"
    # 17 significant digits survive the text round trip
    assert_allclose(loaded.frame.to_numpy(), table.frame.to_numpy(), rtol=0, atol=0)


def test_store_save_and_load(tmp_path):
    with ScanStore(str(tmp_path / "sql" / "store.db")) as store:
        run_id = store.save_table(_table())
        other = store.save_table(ScanTable.from_rows(["g"], [(1.0,)], {"g": "1"}, {"subcommand": "steady"}))
        runs = store.get_runs()
        assert [r["id"] for r in runs] == [run_id, other]
        assert [r["id"] for r in store.get_runs("pz-scan")] == [run_id]
        loaded = store.load_table(run_id)
    assert loaded.columns == ["g", "T", "P_z"]
    assert loaded.units["T"] == "pi/muB"
    assert_allclose(loaded.frame.to_numpy(), _table().frame.to_numpy(), rtol=0, atol=0)


def test_store_requires_connection():
    store = ScanStore(":memory:")
    with pytest.raises(ConnectionError):
        store.get_runs()


def test_store_missing_run():
    with ScanStore(":memory:") as store:
        with pytest.raises(KeyError):
            store.load_table(42)
