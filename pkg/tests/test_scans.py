import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.core.disscom import DissCOMRates
from src.core.errors import ConfigError
from src.module.neutron_helix.helical_model import DriveProtocol, HelicalModel, polarization_run
from src.module.neutron_helix.scans import disscom_check, gamma_scan, pz_surface, pz_vs_gT

MODEL = HelicalModel()


def test_pz_surface_grid_order_and_consistency():
    table = pz_surface(MODEL, [0.0, 0.2], [0.5, 1.0], steps=500)
    assert table.columns == ["g", "T", "P_z"]
    assert_allclose(table.column("g"), [0.0, 0.0, 0.2, 0.2])
    assert_allclose(table.column("T"), [0.5, 1.0, 0.5, 1.0])
    direct = polarization_run(MODEL, DriveProtocol(1.0), steps=500).final
    assert table.column("P_z")[1] == direct
    assert table.units["T"] == "pi/muB"


def test_pz_surface_is_independent_of_parallelism():
    serial = pz_surface(MODEL, [0.1, 0.3], [0.4, 0.8], steps=300)
    parallel = pz_surface(MODEL, [0.1, 0.3], [0.4, 0.8], steps=300, jobs=3)
    assert serial.to_text() == parallel.to_text()


def test_pz_surface_short_duration_stays_polarized():
    table = pz_surface(MODEL, [0.0, 0.5], [1e-3], steps=200)
    assert np.all(table.column("P_z") > 0.999)


def test_pz_surface_rejects_empty_grid():
    with pytest.raises(ConfigError):
        pz_surface(MODEL, [], [1.0])


def test_pz_vs_gT():
    table = pz_vs_gT(MODEL, [2.0], [0.0, 1.0], steps=400)
    assert table.column("P_z")[0] == 1.0
    expected = polarization_run(MODEL.with_g(2.0), DriveProtocol(0.5), steps=400).final
    assert table.column("P_z")[1] == expected


def test_pz_vs_gT_rejects_zero_g():
    with pytest.raises(ConfigError):
        pz_vs_gT(MODEL, [0.0], [1.0])


def test_gamma_scan_normalization():
    table = gamma_scan(MODEL, [0.0, 0.5], alpha=1e-6, beta=2e-4, points=8)
    assert table.column("Gamma_norm")[0] == 1.0
    assert np.all(np.isfinite(table.column("Gamma")))
    assert table.provenance["mass"] == pytest.approx(1000.0)
    assert table.provenance["k_z"] == pytest.approx(0.2)


def test_gamma_decreases_with_rate():
    table = gamma_scan(MODEL, [0.0, 0.2, 0.4, 0.6, 0.8, 1.0], alpha=1e-6, beta=2e-4)
    norm = table.column("Gamma_norm")
    assert norm[0] == 1.0
    assert np.all(np.diff(norm) < 0)
    assert table.provenance["min_rate"] > 0


def test_gamma_scan_parallel_matches_serial():
    serial = gamma_scan(MODEL, [0.2, 0.4], alpha=1e-6, beta=2e-4, points=8)
    parallel = gamma_scan(MODEL, [0.2, 0.4], alpha=1e-6, beta=2e-4, points=8, jobs=2)
    assert_allclose(serial.column("Gamma"), parallel.column("Gamma"), rtol=0, atol=0)


def test_disscom_check_rows():
    rates = [DissCOMRates(0.0, 0.0), DissCOMRates(1e-3, 1e-4)]
    table = disscom_check(MODEL, rates, alpha=1e-6, beta=2e-4, n_max=8, points=8)
    zero, finite = table.frame.iloc[0], table.frame.iloc[1]
    assert zero["Gamma"] == zero["Gamma_plain"]
    assert math.isnan(zero["cd_defect"])
    assert finite["cd_defect"] <= 1e-10
    assert finite["lc_defect"] <= 1e-10
    assert zero["lc_defect"] == 0.0
    assert finite["Gamma"] != finite["Gamma_plain"]
    assert table.provenance["n_max"] == 8
