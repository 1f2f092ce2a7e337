import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.core.bo import SlowPoint, SlowVariableModel, build_bundle, loop_averages
from src.core.disscom import (
    DissCOMRates,
    build_CD,
    build_LC,
    cd_rhs,
    disscom_rhs,
    disscom_validity,
    factorized_pieces,
    lc_level_couplings,
    lc_matrix_elements,
    level_hamiltonians,
    oscillator_validity,
    pair_states,
    xp_matrices,
)
from src.core.errors import DimensionMismatch, InvalidRates
from src.core.liouville import OpenSystemModel, QuadraticPair, devectorize, dissipator, vectorize
from src.module.neutron_helix.helical_model import HelicalModel, chi_eigensystem, hst_matrix, pair_bundle
from tests.conftest import random_density

RATES = DissCOMRates(1e-3, 1e-4)


def test_xp_matrices_ladder():
    basis = xp_matrices(6)
    assert basis.x[0, 1] == pytest.approx(1 / math.sqrt(2))
    assert basis.p[0, 1] == pytest.approx(-1j / math.sqrt(2))
    comm = basis.x @ basis.p - basis.p @ basis.x
    inner = slice(0, 5)
    assert_allclose(comm[inner, inner], 1j * np.eye(5), atol=1e-12)


def test_xp_matrices_rejects_tiny_basis():
    with pytest.raises(ValueError):
        xp_matrices(1)


def test_build_CD_requires_positive_gamma1():
    with pytest.raises(InvalidRates):
        build_CD(DissCOMRates(0.0, 1e-3), xp_matrices(4))


def test_three_forms_agree_on_interior(rng):
    basis = xp_matrices(8)
    inner = basis.interior
    C, D = build_CD(RATES, basis)
    LC = build_LC(basis, RATES)
    for _ in range(10):
        rho = random_density(rng, 8)
        direct = disscom_rhs(rho, RATES, basis)
        assert_allclose(cd_rhs(rho, C, D)[inner, inner], direct[inner, inner], atol=1e-10)
        via_lc = devectorize(-1j * (LC @ vectorize(rho)))
        assert_allclose(via_lc[inner, inner], direct[inner, inner], atol=1e-10)


def test_cd_form_matches_generic_quadratic_dissipator(rng):
    basis = xp_matrices(5)
    C, D = build_CD(RATES, basis)
    model = OpenSystemModel(5, np.zeros((5, 5)), QuadraticPair(C, D))
    rho = random_density(rng, 5)
    assert_allclose(dissipator(model, rho), cd_rhs(rho, C, D), atol=1e-14)


def test_lc_is_linear_in_rates():
    basis = xp_matrices(5)
    a = build_LC(basis, DissCOMRates(1.0, 0.0))
    b = build_LC(basis, DissCOMRates(0.0, 1.0))
    assert_allclose(build_LC(basis, DissCOMRates(0.3, 0.7)), 0.3 * a + 0.7 * b, atol=1e-14)


def test_lc_diagonal_purely_imaginary_for_real_states():
    basis = xp_matrices(6)
    LC = build_LC(basis, RATES)
    # oscillator eigenstates below the truncated top level
    chi = np.eye(6)
    for m in range(4):
        for n in range(4):
            value = lc_matrix_elements(chi, LC, (m, n), (m, n))
            assert abs(value.real) < 1e-14


def test_lc_table_matches_single_elements(rng):
    basis = xp_matrices(4)
    LC = build_LC(basis, RATES)
    chi, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    table = lc_matrix_elements(chi, LC)
    assert table[1 * 4 + 2, 3 * 4 + 0] == pytest.approx(lc_matrix_elements(chi, LC, (1, 2), (3, 0)))


def test_lc_table_rejects_wrong_size():
    with pytest.raises(DimensionMismatch):
        lc_matrix_elements(np.eye(3), np.zeros((4, 4)))


def _keyed(report):
    return {(ch.n, ch.m, ch.k, ch.k_prime): ch for ch in report.channels}


@pytest.fixture(scope="module")
def pair_setup():
    return pair_bundle(HelicalModel(M=1000.0), points=8), xp_matrices(6)


def test_pair_bundle_levels_are_product_states():
    bundle = pair_bundle(HelicalModel(theta=1.1), points=4)
    point = bundle.grid[1]
    chi1, chi2, _, _ = chi_eigensystem(1.1, point.coords[0] / (2 * math.pi))
    assert_allclose(bundle.rights[1], pair_states(np.column_stack([chi1, chi2])), atol=1e-12)
    assert_allclose(bundle.energies[1], [0, 2, -2, 0], atol=1e-12)
    block = hst_matrix(point.coords[0], point.coords[1], 1.1, 0.0)
    assert_allclose(block @ bundle.rights[1], bundle.rights[1] * bundle.energies[1], atol=1e-12)


def test_zero_rates_reduce_to_oscillator_validity(pair_setup):
    bundle, basis = pair_setup
    plain = oscillator_validity(bundle, basis)
    report = disscom_validity(bundle, DissCOMRates(0.0, 0.0), basis)
    assert report.gamma == plain.gamma
    assert [ch.numerator for ch in report.channels] == [ch.numerator for ch in plain.channels]
    assert [ch.denominator for ch in report.channels] == [ch.denominator for ch in plain.channels]


def test_lc_part_of_numerators_scales_with_rates(pair_setup):
    bundle, basis = pair_setup
    averages = loop_averages(bundle)
    single = lc_level_couplings(averages, basis, RATES)
    assert_allclose(lc_level_couplings(averages, basis, RATES.scaled(3.0)), 3.0 * single, atol=1e-15)
    plain = _keyed(oscillator_validity(bundle, basis))
    once = _keyed(disscom_validity(bundle, RATES, basis))
    thrice = _keyed(disscom_validity(bundle, RATES.scaled(3.0), basis))
    shared = set(plain) & set(once) & set(thrice)
    assert shared
    lc_once = np.array([once[key].numerator - plain[key].numerator for key in sorted(shared)])
    lc_thrice = np.array([thrice[key].numerator - plain[key].numerator for key in sorted(shared)])
    assert np.max(np.abs(lc_once)) > 0
    assert_allclose(lc_thrice, 3.0 * lc_once, rtol=1e-9, atol=1e-18)


def test_lc_diagonal_enters_the_denominators(pair_setup):
    bundle, basis = pair_setup
    averages = loop_averages(bundle)
    lc = lc_level_couplings(averages, basis, RATES)
    plain = _keyed(oscillator_validity(bundle, basis))
    report = _keyed(disscom_validity(bundle, RATES, basis))
    n_max = basis.n_max
    checked = 0
    for key in sorted(set(plain) & set(report))[:50]:
        a, b, (j, l), (jp, lp) = key
        inc, out = int(j) * n_max + int(l), int(jp) * n_max + int(lp)
        shift = lc[b, b][out, out] - lc[a, a][inc, inc]
        assert report[key].denominator - plain[key].denominator == pytest.approx(shift, abs=1e-12)
        checked += 1
    assert checked == 50
    hams = level_hamiltonians(averages, basis, bundle.model.mass, lc)
    bare = level_hamiltonians(averages, basis, bundle.model.mass)
    assert_allclose(hams[1] - bare[1], lc[1, 1], atol=1e-12)


def test_gamma1_alone_couples_no_levels(pair_setup):
    bundle, basis = pair_setup
    lc = lc_level_couplings(loop_averages(bundle), basis, DissCOMRates(1e-3, 0.0))
    for a in range(bundle.n_levels):
        for b in range(bundle.n_levels):
            if a != b:
                assert np.max(np.abs(lc[b, a])) == 0.0


def test_validity_needs_system_and_ancilla_coordinates():
    closed = SlowVariableModel(block=lambda coords: np.diag([1.0, -1.0]).astype(complex), n_system=1)
    bundle = build_bundle(closed, [SlowPoint((0.1 * k,), n_system=1) for k in range(4)])
    with pytest.raises(DimensionMismatch):
        disscom_validity(bundle, RATES, xp_matrices(5))


def test_lc_table_resolves_identity(rng):
    basis = xp_matrices(4)
    LC = build_LC(basis, RATES)
    chi, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    Lam = pair_states(chi)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    table = lc_matrix_elements(chi, LC)
    assert_allclose(table @ (Lam.conj().T @ v), Lam.conj().T @ (LC @ v), atol=1e-9)


def test_factorized_pieces_of_helical_states():
    theta = math.pi / 3

    def chi_of(z):
        chi1, chi2, _, _ = chi_eigensystem(theta, z / (2 * math.pi))
        return np.column_stack([chi1, chi2])

    table = np.arange(16, dtype=complex).reshape(4, 4)
    pieces = factorized_pieces(chi_of, 0.3, 0.7, table, 0, 1)
    # chi1 = (cos(theta/2) exp(-i phi), sin(theta/2)) gives A = cos^2(theta/2)
    assert pieces.system_potential == pytest.approx(math.cos(theta / 2) ** 2, abs=1e-7)
    # the conjugate state winds the other way
    assert pieces.ancilla_potential == pytest.approx(-math.sin(theta / 2) ** 2, abs=1e-7)
    assert pieces.lc_diagonal == table[1, 1]
