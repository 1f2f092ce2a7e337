import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.core.errors import NearDegenerate, SingularPairing, StepOverflow
from src.core.linalg import (
    biorthonormalize,
    cubic_residual,
    eig_general,
    propagate,
    propagate_constant,
    relax,
    solve_cubic,
    spectral_gap,
)


def _sorted(values):
    values = np.asarray(values, dtype=complex)
    return values[np.lexsort((values.imag, values.real))]


def test_solve_cubic_factored():
    # (x - 1)(x - 2)(x - 3)
    roots = solve_cubic(-6, 11, -6)
    assert_allclose(_sorted(roots), [1, 2, 3], atol=1e-12)


def test_solve_cubic_triple_root():
    roots = solve_cubic(0, 0, 0)
    assert_allclose(roots, [0, 0, 0], atol=1e-300)


def test_solve_cubic_random_complex_roots(rng):
    for _ in range(200):
        r = rng.normal(size=3) + 1j * rng.normal(size=3)
        c2 = -(r[0] + r[1] + r[2])
        c1 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2]
        c0 = -r[0] * r[1] * r[2]
        roots = solve_cubic(c2, c1, c0)
        for root in roots:
            assert cubic_residual(c2, c1, c0, root) < 1e-10
        assert_allclose(np.sort_complex(roots), np.sort_complex(r), atol=1e-7)


def test_solve_cubic_bounded_coefficients(rng):
    for _ in range(1000):
        c2, c1, c0 = rng.uniform(-7, 7, size=3) + 1j * rng.uniform(-7, 7, size=3)
        roots = solve_cubic(c2, c1, c0)
        for root in roots:
            assert cubic_residual(c2, c1, c0, root) < 1e-10
        assert roots.sum() == pytest.approx(-c2, abs=1e-8)


def test_solve_cubic_gapped_two_level_spectrum():
    # E (E^2 - 4)
    roots = solve_cubic(0, -4, 0)
    assert_allclose(_sorted(roots), [-2, 0, 2], atol=1e-12)


def test_spectral_gap():
    assert spectral_gap([0, 1, 3]) == pytest.approx(1.0)
    assert spectral_gap([2.0]) == np.inf


def test_eig_general_biorthonormal(rng):
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    spectrum = eig_general(A)
    assert_allclose(spectrum.overlap_matrix(), np.eye(6), atol=1e-9)
    for pair in spectrum.pairs:
        assert_allclose(A @ pair.right, pair.value * pair.right, atol=1e-9 * np.linalg.norm(A, 2))
        assert_allclose(pair.left.conj() @ A, pair.value * pair.left.conj(),
                        atol=1e-9 * np.linalg.norm(A, 2) * np.linalg.norm(pair.left))
        assert np.linalg.norm(pair.right) == pytest.approx(1.0)


def test_eig_general_values_sum_to_trace(rng):
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert eig_general(A).values.sum() == pytest.approx(np.trace(A), abs=1e-9)


def test_eig_general_hermitian_matches_eigh(rng):
    G = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    H = (G + G.conj().T) / 2
    values = np.sort(eig_general(H).values.real)
    assert_allclose(values, np.linalg.eigvalsh(H), atol=1e-10)


def test_eig_general_diagonal():
    spectrum = eig_general(np.diag([1.0, 2.0, 3.0]))
    assert_allclose(np.sort(spectrum.values.real), [1, 2, 3])


def test_eig_general_strict_degenerate():
    with pytest.raises(NearDegenerate):
        eig_general(np.eye(3), strict=True)


def test_eig_general_rejects_non_square():
    with pytest.raises(ValueError):
        eig_general(np.zeros((2, 3)))


def test_biorthonormalize_singular():
    r = np.array([1.0, 0.0])
    l = np.array([0.0, 1.0])
    with pytest.raises(SingularPairing):
        biorthonormalize([r], [l])


def test_propagate_matches_exponential(rng):
    G = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = (G + G.conj().T) / 2 - 0.3j * np.eye(4)
    psi0 = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi = propagate(H, psi0, (0.0, 1.0), 1e-3)
    assert_allclose(psi, relax(H, psi0, 1.0), atol=1e-8)


def test_propagate_observer_counts_steps():
    seen = []
    propagate(np.eye(2), np.array([1.0, 0.0]), (0.0, 1.0), 0.3, observer=lambda t, psi: seen.append(t))
    # ceil(1/0.3) = 4 steps plus the initial call
    assert len(seen) == 5
    assert seen[-1] == pytest.approx(1.0)


def test_propagate_overflow():
    H = 100j * np.eye(2)
    with pytest.raises(StepOverflow):
        propagate(H, np.array([1.0, 0.0]), (0.0, 1.0), 1e-3)


def test_propagate_is_fourth_order(rng):
    G = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = (G + G.conj().T) / 4 - 0.2j * np.eye(4)
    psi0 = rng.normal(size=4) + 1j * rng.normal(size=4)
    exact = relax(H, psi0, 1.0)
    coarse = np.linalg.norm(propagate(H, psi0, (0.0, 1.0), 0.04) - exact)
    fine = np.linalg.norm(propagate(H, psi0, (0.0, 1.0), 0.02) - exact)
    assert np.log2(coarse / fine) >= 3.8


def test_propagate_constant_takes_exact_steps(rng):
    G = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H = (G + G.conj().T) / 2 - 0.5j * np.eye(3)
    psi0 = rng.normal(size=3) + 1j * rng.normal(size=3)
    seen = []
    psi = propagate_constant(H, psi0, (0.0, 2.0), 8, observer=lambda t, state: seen.append(t))
    assert_allclose(psi, relax(H, psi0, 2.0), atol=1e-10)
    assert len(seen) == 9
    assert seen[-1] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        propagate_constant(H, psi0, (0.0, 1.0), 0)
