"""
Neutron spin in a static helical magnetic field with spin-flip dissipation.

Energies are in units of muB, durations T in units of pi/muB. The spin basis
is (up, down) along z and the doubled basis is (uu, ud, du, dd), system index
first. The field direction at height z is fixed by phi = 2*pi*z/L.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.core.bo import EigenBundle, SlowPoint, SlowVariableModel, build_bundle
from src.core.errors import ConfigError, DegenerateEigenvalue, NoZeroMode
from src.core.linalg import eig_general, propagate_constant, solve_cubic
from src.core.liouville import (
    DensityMatrix,
    LindbladSet,
    OpenSystemModel,
    build_effective_generator,
    default_steps,
    devectorize,
    evolve_vectorized,
    master_rhs,
    vectorize,
)

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |down><up|, drives the spin into |-1/2>
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SPIN_UP = np.array([[1, 0], [0, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)
# S - S^A, generates a common rotation of system and ancilla about z
FRAME_ROTATION = (np.kron(SIGMA_Z, I2) - np.kron(I2, SIGMA_Z)) / 2

PICTURES = ("bo", "lab")

ZERO_MODE_TOL = 1e-10
SELF_ORTHOGONAL_TOL = 1e-12


@dataclass(frozen=True)
class HelicalModel:
    """
    Args:
        B: field magnitude
        theta: tilt of the field from the z axis
        L: helix period
        M: neutron mass
        mu: magnetic moment
        g: dissipation rate gamma in units of muB
    """
    B: float = 1.0
    theta: float = math.pi / 2
    L: float = 1.0
    M: float = 1.0
    mu: float = 1.0
    g: float = 0.0

    def __post_init__(self):
        for name in ("B", "L", "M", "mu"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.g >= 0:
            raise ConfigError(f"g must be non-negative, got {self.g}")

    @property
    def muB(self) -> float:
        return self.mu * self.B

    @property
    def analytic(self) -> bool:
        """The closed-form spectrum and eigenvectors hold for a field perpendicular to z."""
        return abs(self.theta - math.pi / 2) < 1e-15

    def with_g(self, g: float) -> "HelicalModel":
        return dataclasses.replace(self, g=g)


@dataclass(frozen=True)
class DriveProtocol:
    """Uniform transport from z = 0 to z = L in T (units of pi/muB), starting in |+1/2>."""
    T: float
    initial: np.ndarray = dataclasses.field(default_factory=lambda: SPIN_UP.copy(), compare=False)

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError(f"T must be positive, got {self.T}")

    def duration(self, model: HelicalModel) -> float:
        return math.pi * self.T / model.muB

    def phase_at(self, model: HelicalModel, t: float) -> float:
        """phi(t) = 2 pi z(t) / L with z(t) = L t / duration"""
        return 2 * math.pi * t / self.duration(model)


@dataclass
class PolarizationTrace:
    times: np.ndarray
    pz: np.ndarray

    @property
    def final(self) -> float:
        return float(self.pz[-1])


def helical_B(model: HelicalModel, z: float) -> np.ndarray:
    phi = 2 * math.pi * z / model.L
    st = math.sin(model.theta)
    return model.B * np.array([st * math.cos(phi), st * math.sin(phi), math.cos(model.theta)])


def spin_hamiltonian(theta: float, phi: float, muB: float = 1.0) -> np.ndarray:
    """muB sigma . n with n = (sin theta cos phi, sin theta sin phi, cos theta)."""
    st = math.sin(theta)
    return muB * (st * math.cos(phi) * SIGMA_X + st * math.sin(phi) * SIGMA_Y + math.cos(theta) * SIGMA_Z)


def chi_eigensystem(theta: float, z: float, L: float = 1.0, muB: float = 1.0):
    """Instantaneous eigenstates (chi1, chi2) of the spin Hamiltonian with energies (+muB, -muB)."""
    phase = np.exp(-2j * math.pi * z / L)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    chi1 = np.array([c * phase, s], dtype=complex)
    chi2 = np.array([s * phase, -c], dtype=complex)
    return chi1, chi2, muB, -muB


def hst_matrix(phi: float, phiA: float, theta: float, g: float) -> np.ndarray:
    """Spin block H_S^T(phi, phi^A) in units of muB, written out entrywise."""
    st, ct = math.sin(theta), math.cos(theta)
    e, eA = np.exp(1j * phi), np.exp(1j * phiA)
    return np.array([
        [-1j * g, -st * eA, st / e, 0],
        [-st / eA, 2 * ct - 0.5j * g, 0, st / e],
        [st * e, 0, -2 * ct - 0.5j * g, -st * eA],
        [1j * g, st * e, -st / eA, 0],
    ], dtype=complex)


def _open_model(theta: float, phi: float, g: float, muB: float = 1.0) -> OpenSystemModel:
    return OpenSystemModel(2, spin_hamiltonian(theta, phi, muB), LindbladSet(((g * muB, SIGMA_MINUS),)))


def hst_from_liouville(phi: float, phiA: float, theta: float, g: float) -> np.ndarray:
    """The same block assembled from the generic vectorization, system at phi and ancilla at phi^A."""
    system = build_effective_generator(_open_model(theta, phi, g))
    ancilla = build_effective_generator(_open_model(theta, phiA, g))
    return system.parts["system"] - ancilla.parts["ancilla"] + system.parts["dissipative"]


def cubic_coefficients(phi: float, phiA: float, g: float) -> Tuple[complex, complex, complex]:
    return 1.5j * g, -0.5 * (8 + g * g), 2j * g * (np.exp(-1j * (phi - phiA)) - 1)


def spectrum_analytic(phi: float, phiA: float, g: float) -> np.ndarray:
    """E1 = -ig/2 followed by the cubic roots in ascending real part (theta = pi/2)."""
    roots = solve_cubic(*cubic_coefficients(phi, phiA, g))
    roots = roots[np.lexsort((roots.imag, roots.real))]
    return np.concatenate([[-0.5j * g], roots])


def _components(j: int, E: complex, phi: float, phiA: float, g: float) -> Tuple[np.ndarray, np.ndarray]:
    e, eA = np.exp(1j * phi), np.exp(1j * phiA)
    if j == 1:
        right = np.array([0, 1 / eA, e, 0], dtype=complex)
        row = np.array([0, eA, 1 / e, 0], dtype=complex)
        return right, row
    A = 4 - 1j * g * E - 2 * E * E
    right = np.array([
        A,
        -2j * g / e + 2 * E / eA,
        2j * g * eA - 2 * e * E,
        4 * e / eA + g * (g - 2j * E),
    ], dtype=complex)
    row = np.array([e / eA * A, 2 * e * E, -2 * E / eA, 4], dtype=complex)
    return right, row


def eigvecs_analytic(j: int, phi: float, phiA: float, g: float,
                     energies: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Closed-form right eigenvector and left eigenvector (as a ket) of level j = 1..4.

    The right vector is scaled to unit norm and the left one so that <L|R> = 1.

    Raises:
        DegenerateEigenvalue: the left and right vectors are self-orthogonal
    """
    if j not in (1, 2, 3, 4):
        raise ValueError(f"level index must be 1..4, got {j}")
    if energies is None:
        energies = spectrum_analytic(phi, phiA, g)
    right, row = _components(j, energies[j - 1], phi, phiA, g)
    norm_r = np.linalg.norm(right)
    N = row @ right
    if norm_r == 0 or abs(N) < SELF_ORTHOGONAL_TOL * norm_r * np.linalg.norm(row):
        logger.error(f"Self-orthogonal eigenvector j={j} at phi={phi:.6g}, phiA={phiA:.6g}, g={g:.6g}")
        raise DegenerateEigenvalue(f"normalization of level {j} vanishes")
    right = right / norm_r
    row = row * norm_r / N
    return right, row.conj()


def helical_eigensystem(phi: float, phiA: float, g: float, muB: float = 1.0):
    """(energies, rights, lefts) of the spin block, columns in the closed-form order."""
    E = spectrum_analytic(phi, phiA, g)
    pairs = [eigvecs_analytic(j, phi, phiA, g, E) for j in range(1, 5)]
    rights = np.column_stack([r for r, _ in pairs])
    lefts = np.column_stack([l for _, l in pairs])
    return muB * E, rights, lefts


def steady_state(g: float, theta: float = math.pi / 2, phi: float = 0.0, strict: bool = False) -> DensityMatrix:
    """
    Zero mode of the effective generator at phi = phi^A, as a trace-one density matrix.

    Raises:
        NoZeroMode: no eigenvalue within 1e-10 of zero, or (strict) more than one
    """
    model = _open_model(theta, phi, g)
    spectrum = eig_general(build_effective_generator(model).matrix)
    zeros = [p for p in spectrum.pairs if abs(p.value) < ZERO_MODE_TOL]
    if not zeros:
        logger.error(f"No zero mode at g={g}")
        raise NoZeroMode(f"no eigenvalue within {ZERO_MODE_TOL} of zero at g={g}")
    if len(zeros) > 1:
        if strict:
            logger.error(f"Zero mode is {len(zeros)}-fold degenerate at g={g}")
            raise NoZeroMode(f"zero mode is {len(zeros)}-fold degenerate at g={g}")
        # every state commuting with H_S is stationary; report the unpolarized one
        logger.warning(f"Degenerate zero mode at g={g}; returning the maximally mixed state")
        return DensityMatrix(np.eye(2, dtype=complex) / 2)
    rho = devectorize(zeros[0].right)
    rho = rho / np.trace(rho)
    rho = (rho + rho.conj().T) / 2
    residual = np.max(np.abs(master_rhs(model, rho)))
    logger.debug(f"Steady state at g={g}: fixed-point residual {residual:.3e}")
    return DensityMatrix(rho)


def polarization(rho: np.ndarray) -> float:
    return float(np.real(np.trace(SIGMA_Z @ rho)))


def drive_model(model: HelicalModel, protocol: DriveProtocol) -> OpenSystemModel:
    def hamiltonian(t: float) -> np.ndarray:
        return spin_hamiltonian(model.theta, protocol.phase_at(model, t), model.muB)

    return OpenSystemModel(2, hamiltonian, LindbladSet(((model.g * model.muB, SIGMA_MINUS),)))


def level_diagonal(generator: np.ndarray, operator: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Sum of P O P over the eigenvalue clusters of ``generator``, P the spectral projector of a cluster."""
    spectrum = eig_general(generator)
    values, R, L = spectrum.values, spectrum.rights, spectrum.lefts
    scale = max(float(np.abs(values).max()), 1.0)
    out = np.zeros_like(operator, dtype=complex)
    seen = set()
    for i in range(len(values)):
        if i in seen:
            continue
        cluster = [j for j in range(len(values)) if abs(values[j] - values[i]) < tol * scale]
        seen.update(cluster)
        P = R[:, cluster] @ L[:, cluster].conj().T
        out += P @ operator @ P
    return out


def bo_generator(model: HelicalModel, protocol: DriveProtocol) -> np.ndarray:
    """
    Zeroth-order BO generator in the frame co-moving with the field.

    In that frame the block is frozen at its entry value H_T(0, 0) and the
    transport adds -phi' (S - S^A). Only the part of that term diagonal in the
    levels of H_T survives at zeroth order; it vanishes for theta = pi/2.
    """
    G = build_effective_generator(_open_model(model.theta, 0.0, model.g, model.muB)).matrix
    phi_rate = 2 * math.pi / protocol.duration(model)
    return G - phi_rate * level_diagonal(G, FRAME_ROTATION)


def polarization_run(model: HelicalModel, protocol: DriveProtocol, steps: Optional[int] = None,
                     picture: str = "bo") -> PolarizationTrace:
    """
    P_z(t) while the neutron is carried once through the helix.

    ``picture="bo"`` propagates the zeroth-order BO generator exactly; P_z is the
    same in the co-moving and the lab frame. ``picture="lab"`` integrates the
    full time-dependent master equation with RK4.
    """
    if picture not in PICTURES:
        raise ConfigError(f"picture must be one of {PICTURES}, got {picture!r}")
    duration = protocol.duration(model)
    steps = steps or default_steps(model.muB * duration)
    if steps < 100:
        raise ConfigError(f"steps must be at least 100, got {steps}")
    times: List[float] = []
    pz: List[float] = []

    def observe(t: float, rho: np.ndarray) -> None:
        times.append(t)
        pz.append(polarization(rho))

    if picture == "lab":
        evolve_vectorized(protocol.initial, drive_model(model, protocol), duration, steps=steps, observer=observe)
    else:
        propagate_constant(bo_generator(model, protocol), vectorize(protocol.initial), (0.0, duration), steps,
                           observer=lambda t, vec: observe(t, devectorize(vec)))
    trace = PolarizationTrace(np.array(times), np.array(pz))
    logger.debug(f"P_z run g={model.g}, T={protocol.T}: final {trace.final:.6f}")
    return trace


def pz_closed_form(T: float, theta: float = math.pi / 2) -> float:
    """
    Exact lab-picture P_z(T) at g = 0. In the frame co-rotating with the field
    the spin precesses about sin(theta) x + (cos(theta) - 1/T) z; the 1/T part
    is the frame term the BO picture keeps only level-diagonally.
    """
    if T <= 0:
        return 1.0
    st = math.sin(theta)
    detuning = math.cos(theta) - 1.0 / T
    omega2 = st * st + detuning * detuning
    flip = st * st / omega2 * math.sin(math.pi * T * math.sqrt(omega2)) ** 2
    return 1.0 - 2.0 * flip


def closed_system_conditions(model: HelicalModel, k_z: float) -> Tuple[float, float]:
    """(1/(muB M^2 L), k_z/(muB M L)); both must be small for the BO treatment to hold."""
    return 1.0 / (model.muB * model.M ** 2 * model.L), k_z / (model.muB * model.M * model.L)


def parameters_from_conditions(model: HelicalModel, alpha: float, beta: float) -> Tuple[HelicalModel, float]:
    """Mass and k_z that realize the given closed-system numbers at the model's muB and L."""
    if alpha <= 0 or beta <= 0:
        raise ConfigError(f"alpha and beta must be positive, got {alpha}, {beta}")
    mass = 1.0 / math.sqrt(alpha * model.muB * model.L)
    k_z = beta * model.muB * mass * model.L
    return dataclasses.replace(model, M=mass), k_z


def slow_model(model: HelicalModel) -> SlowVariableModel:
    """Spin block over the slow coordinates (phi, phi^A); d/dz = (2 pi/L) d/dphi."""
    muB, theta, g = model.muB, model.theta, model.g

    def block(coords: np.ndarray) -> np.ndarray:
        return muB * hst_matrix(coords[0], coords[1], theta, g)

    eigensystem = None
    if model.analytic:
        eigensystem = lambda coords: helical_eigensystem(coords[0], coords[1], g, muB)
    return SlowVariableModel(block=block, n_system=1, mass=model.M, coord_scale=2 * math.pi / model.L,
                             eigensystem=eigensystem)


def loop_grid(points: int = 16) -> List[SlowPoint]:
    """Closed loop phi = phi^A through one helix period."""
    return [SlowPoint((2 * math.pi * k / points, 2 * math.pi * k / points), n_system=1) for k in range(points)]


def validity_bundle(model: HelicalModel, points: int = 16) -> EigenBundle:
    return build_bundle(slow_model(model), loop_grid(points))


def pair_eigensystem(coords: np.ndarray, theta: float, L: float = 1.0, muB: float = 1.0):
    """
    Closed-spin levels Lambda_mn = chi_m(phi) kron chi_n^A(phi^A), index m*2 + n,
    with energies eps_m - eps_n. The pairs are orthonormal, so lefts equal rights.
    """
    phi, phiA = float(coords[0]), float(coords[1])
    chi1, chi2, e1, e2 = chi_eigensystem(theta, phi * L / (2 * math.pi), L, muB)
    chiA1, chiA2, _, _ = chi_eigensystem(theta, phiA * L / (2 * math.pi), L, muB)
    system, ancilla, eps = (chi1, chi2), (chiA1.conj(), chiA2.conj()), (e1, e2)
    rights = np.column_stack([np.kron(system[m], ancilla[n]) for m in range(2) for n in range(2)])
    energies = np.array([eps[m] - eps[n] for m in range(2) for n in range(2)], dtype=complex)
    return energies, rights, rights.copy()


def pair_slow_model(model: HelicalModel) -> SlowVariableModel:
    """Closed spin block (no spin dissipation) over (phi, phi^A) in the chi_m kron chi_n^A levels."""
    muB, theta, L = model.muB, model.theta, model.L

    def block(coords: np.ndarray) -> np.ndarray:
        return muB * hst_matrix(coords[0], coords[1], theta, 0.0)

    return SlowVariableModel(block=block, n_system=1, mass=model.M, coord_scale=2 * math.pi / L,
                             eigensystem=lambda coords: pair_eigensystem(coords, theta, L, muB))


def pair_bundle(model: HelicalModel, points: int = 16) -> EigenBundle:
    return build_bundle(pair_slow_model(model), loop_grid(points))
