"""
Dissipation of the center-of-mass motion (DissCOM).

The generator
    L rho = g1 (2 x rho x - rho x^2 - x^2 rho) + g2 (x p rho + rho p x - x rho p - p rho x)
is quadratic in (x, p) and not of Lindblad form. Everything lives in a
truncated harmonic-oscillator ladder with mass*frequency = 1 and hbar = 1;
truncation corrupts only the top level. For the validity check the slow
motion of system and ancilla lives on the doubled ladder, and the level
couplings O^T and L_C^T become operators there.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from src.core.bo import (
    SMALL_DENOMINATOR,
    Channel,
    EigenBundle,
    LoopAverages,
    ValidityReport,
    loop_averages,
    report_from_channels,
)
from src.core.errors import DimensionMismatch, InvalidRates
from src.core.liouville import ancilla_conjugate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MotionBasis:
    n_max: int
    x: np.ndarray
    p: np.ndarray

    @property
    def interior(self) -> slice:
        """Block unaffected by the ladder truncation."""
        return slice(0, self.n_max - 2)


@dataclass(frozen=True)
class DissCOMRates:
    """gamma1 in 1/(time*length^2), gamma2 in 1/time, both in oscillator units."""
    gamma1: float
    gamma2: float

    def scaled(self, s: float) -> "DissCOMRates":
        return DissCOMRates(self.gamma1 * s, self.gamma2 * s)


def xp_matrices(n_max: int) -> MotionBasis:
    if n_max < 2:
        raise ValueError(f"n_max must be at least 2, got {n_max}")
    a = np.diag(np.sqrt(np.arange(1, n_max)), 1).astype(complex)
    x = (a + a.conj().T) / math.sqrt(2)
    p = 1j * (a.conj().T - a) / math.sqrt(2)
    return MotionBasis(n_max, x, p)


def build_CD(rates: DissCOMRates, basis: MotionBasis) -> Tuple[np.ndarray, np.ndarray]:
    """C = sqrt(g1) x,  D = sqrt(g1) x - (g2/sqrt(g1)) p"""
    if rates.gamma1 <= 0:
        raise InvalidRates(f"gamma1 must be positive for the C/D form, got {rates.gamma1}")
    s = math.sqrt(rates.gamma1)
    C = s * basis.x
    D = s * basis.x - (rates.gamma2 / s) * basis.p
    return C, D


def disscom_rhs(rho: np.ndarray, rates: DissCOMRates, basis: MotionBasis) -> np.ndarray:
    x, p = basis.x, basis.p
    rho = np.asarray(rho, dtype=complex)
    x2 = x @ x
    return (rates.gamma1 * (2 * x @ rho @ x - rho @ x2 - x2 @ rho)
            + rates.gamma2 * (x @ p @ rho + rho @ p @ x - x @ rho @ p - p @ rho @ x))


def cd_rhs(rho: np.ndarray, C: np.ndarray, D: np.ndarray) -> np.ndarray:
    """C rho D+ + D rho C+ - {D+C, rho}/2 - {C+D, rho}/2"""
    DC = D.conj().T @ C
    CD = C.conj().T @ D
    return (C @ rho @ D.conj().T + D @ rho @ C.conj().T
            - 0.5 * (DC @ rho + rho @ DC) - 0.5 * (CD @ rho + rho @ CD))


def build_LC(basis: MotionBasis, rates: DissCOMRates) -> np.ndarray:
    """
    Doubled-space DissCOM term with i vec(L rho) = L_C vec(rho):

        L_C = -(i/2)[2 g1 x^2 - 2 g2 x p] - (i/2)[2 g1 (x^A)^2 - 2 g2 x^A p^A]
              + i[2 g1 x x^A - g2 (x p^A + p x^A)]
    """
    x, p = basis.x, basis.p
    xA, pA = ancilla_conjugate(x), ancilla_conjugate(p)
    I = np.eye(basis.n_max)
    g1, g2 = rates.gamma1, rates.gamma2
    system = np.kron(2 * g1 * x @ x - 2 * g2 * x @ p, I)
    ancilla = np.kron(I, 2 * g1 * xA @ xA - 2 * g2 * xA @ pA)
    cross = 2 * g1 * np.kron(x, xA) - g2 * (np.kron(x, pA) + np.kron(p, xA))
    return -0.5j * system - 0.5j * ancilla + 1j * cross


def pair_states(chi: np.ndarray) -> np.ndarray:
    """Columns Lambda_mn = chi_m kron chi_n^A, column index m*N + n."""
    chi = np.asarray(chi, dtype=complex)
    return np.kron(chi, ancilla_conjugate(chi))


def lc_matrix_elements(chi: np.ndarray, LC: np.ndarray, mn: Optional[Tuple[int, int]] = None,
                       pq: Optional[Tuple[int, int]] = None):
    """
    <Lambda_mn|L_C|Lambda_pq> with chi_m the columns of ``chi``.

    With both pairs given returns one complex number, otherwise the full table
    indexed [m*N + n, p*N + q].
    """
    chi = np.asarray(chi, dtype=complex)
    N = chi.shape[1]
    if LC.shape != (chi.shape[0] ** 2, chi.shape[0] ** 2):
        raise DimensionMismatch(f"L_C shape {LC.shape} does not match states of length {chi.shape[0]}")
    if mn is not None and pq is not None:
        left = np.kron(chi[:, mn[0]], chi[:, mn[1]].conj())
        right = np.kron(chi[:, pq[0]], chi[:, pq[1]].conj())
        return complex(np.vdot(left, LC @ right))
    Lam = pair_states(chi)
    table = Lam.conj().T @ LC @ Lam
    if table.shape != (N * N, N * N):
        raise DimensionMismatch("pair-state table has unexpected shape")
    return table


@dataclass(frozen=True)
class FactorizedPieces:
    """System vector potential A(m), ancilla vector potential A^A(n), and L_C^T(mn)."""
    system_potential: complex
    ancilla_potential: complex
    lc_diagonal: complex


def factorized_pieces(chi_of: Callable[[float], np.ndarray], x0: float, xA0: float, lc_table: np.ndarray,
                      m: int, n: int, h: float = 1e-4) -> FactorizedPieces:
    """
    Pieces of H^T(mn) for product bases chi_m(x) chi_n^A(x^A); ``chi_of(x)`` returns
    the internal eigenstates as columns. chi_n^A is the conjugate of chi_n.
    """
    d_chi = (chi_of(x0 + h) - chi_of(x0 - h)) / (2 * h)
    chi = chi_of(x0)
    A_m = 1j * np.vdot(chi[:, m], d_chi[:, m])
    d_chiA = (chi_of(xA0 + h).conj() - chi_of(xA0 - h).conj()) / (2 * h)
    chiA = chi_of(xA0).conj()
    A_n = 1j * np.vdot(chiA[:, n], d_chiA[:, n])
    N = chi.shape[1]
    idx = m * N + n
    return FactorizedPieces(complex(A_m), complex(A_n), complex(lc_table[idx, idx]))


def slow_ladder(basis: MotionBasis) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    x, x^A and the r-gradient on the doubled ladder (system index first).

    d/dx = i p on the system; the ancilla r-component is -i d/dx^A = -p^A.
    """
    I = np.eye(basis.n_max)
    x_system = np.kron(basis.x, I)
    x_ancilla = np.kron(I, ancilla_conjugate(basis.x))
    gradient = np.array([1j * np.kron(basis.p, I), -np.kron(I, ancilla_conjugate(basis.p))])
    return x_system, x_ancilla, gradient


def lc_level_couplings(averages: LoopAverages, basis: MotionBasis, rates: DissCOMRates) -> np.ndarray:
    """
    L_C^T between bundle levels as operators on the doubled ladder, [b, a].

    Projecting L_C on the level states leaves L_C itself on the diagonal; the
    momenta in L_C acting on the level states add
    gamma2 (<L_b|d_x R_a> + <L_b|d_{x^A} R_a>) (x - x^A) to every element.
    """
    x_system, x_ancilla, _ = slow_ladder(basis)
    relative = x_system - x_ancilla
    # number-state pairs |j> kron |l>^A
    LC = lc_matrix_elements(np.eye(basis.n_max), build_LC(basis, rates))
    first, _ = averages.zero_harmonic()
    n_levels = len(averages.hamiltonians)
    out = np.zeros((n_levels, n_levels) + LC.shape, dtype=complex)
    for b in range(n_levels):
        for a in range(n_levels):
            if a == b:
                A = averages.hamiltonians[a].connection
                out[a, a] = LC + rates.gamma2 * (-1j * A[0] + A[1]) * relative
            else:
                out[b, a] = rates.gamma2 * (first[0, b, a] + 1j * first[1, b, a]) * relative
    return out


def level_hamiltonians(averages: LoopAverages, basis: MotionBasis, mass: float,
                       lc_levels: Optional[np.ndarray] = None) -> np.ndarray:
    """H^T(a) = -(1/2M)(grad_r - i A^T(a))^2 + V^T + E_a + L_C^T(a) on the doubled ladder."""
    _, _, gradient = slow_ladder(basis)
    I = np.eye(gradient.shape[1])
    hams = []
    for a, ham in enumerate(averages.hamiltonians):
        shifted = [gradient[mu] - 1j * ham.connection[mu] * I for mu in range(len(gradient))]
        H = -sum(s @ s for s in shifted) / (2 * mass) + (ham.potential + ham.energy) * I
        if lc_levels is not None:
            H = H + lc_levels[a, a]
        hams.append(H)
    return np.array(hams)


def level_O(averages: LoopAverages, basis: MotionBasis, mass: float, a: int, b: int) -> np.ndarray:
    """O^T(b, a) = -(1/2M)(2 <L_b|grad R_a> . (grad_r - i A^T(a)) + second-order part) on the doubled ladder."""
    _, _, gradient = slow_ladder(basis)
    I = np.eye(gradient.shape[1])
    first, second = averages.zero_harmonic()
    connection = averages.hamiltonians[a].connection
    drive = sum(first[mu, b, a] * (gradient[mu] - 1j * connection[mu] * I) for mu in range(len(gradient)))
    return -(2 * drive + second[b, a] * I) / (2 * mass)


def _ladder_validity(bundle: EigenBundle, basis: MotionBasis, rates: Optional[DissCOMRates],
                     gamma0: Optional[float]) -> ValidityReport:
    if len(bundle.grid[0].coords) != 2 or bundle.grid[0].n_system != 1:
        raise DimensionMismatch("the ladder validity needs one system and one ancilla coordinate")
    if basis.n_max < 3:
        raise ValueError(f"n_max must be at least 3 for a nonempty interior, got {basis.n_max}")
    averages = loop_averages(bundle)
    mass = bundle.model.mass
    lc = lc_level_couplings(averages, basis, rates) if rates is not None else None
    hams = level_hamiltonians(averages, basis, mass, lc)
    n_max, top = basis.n_max, basis.n_max - 2
    interior = [j * n_max + l for j in range(top) for l in range(top)]
    labels = [(float(j), float(l)) for j in range(top) for l in range(top)]
    energies = np.array([np.diag(H)[interior] for H in hams])

    kept, excluded = [], 0
    for a in range(bundle.n_levels):
        for b in range(bundle.n_levels):
            if a == b:
                continue
            coupling = level_O(averages, basis, mass, a, b)
            if lc is not None:
                coupling = coupling + lc[b, a]
            block = coupling[np.ix_(interior, interior)]
            for i, k in enumerate(labels):
                for j, k_prime in enumerate(labels):
                    denominator = energies[b, j] - energies[a, i]
                    if abs(denominator) < SMALL_DENOMINATOR:
                        excluded += 1
                        continue
                    kept.append(Channel(a, b, k, k_prime, complex(block[j, i]), complex(denominator)))
    notes = [f"ladder states below {top} on system and ancilla"]
    return report_from_channels(kept, excluded, gamma0, notes)


def oscillator_validity(bundle: EigenBundle, basis: MotionBasis, gamma0: Optional[float] = None) -> ValidityReport:
    """Spin-only validity ratios with the slow motion on the doubled ladder, channels labelled by ladder states."""
    return _ladder_validity(bundle, basis, None, gamma0)


def disscom_validity(bundle: EigenBundle, rates: DissCOMRates, basis: MotionBasis,
                     gamma0: Optional[float] = None) -> ValidityReport:
    """
    Validity ratios with perturbation O^T(b, a) + L_C^T(b, a). The diagonal
    L_C^T(a) sits in the zeroth-order energies; with zero rates the report is
    the oscillator_validity report.
    """
    report = _ladder_validity(bundle, basis, rates, gamma0)
    logger.info(f"DissCOM validity: Gamma={report.gamma:.6g} over {len(report.channels)} channels")
    return report
