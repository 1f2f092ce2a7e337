"""
Vectorization of Markovian master equations.

A density matrix rho on N levels is mapped to a doubled ket of N^2
components, component (m, n) = <E_m|rho|E_n> stored row-major (m is the
system index). In that ordering vec(A rho B) = (A kron B^T) vec(rho), and
for a Hermitian operator B^T equals its ancilla partner B^A = conj(B).

The effective generator H_T satisfies i d/dt vec(rho) = H_T vec(rho).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.config import STEPS_PER_UNIT
from src.core.errors import DimensionMismatch, StepOverflow, UnsupportedDissipator
from src.core.linalg import propagate

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
Hamiltonian = Union[np.ndarray, Callable[[float], np.ndarray]]


@dataclass(frozen=True)
class LindbladSet:
    """List of (rate, jump operator); rho' = sum_k rate_k (J rho J+ - {J+J, rho}/2)."""
    channels: Tuple[Tuple[float, np.ndarray], ...]

    def __post_init__(self):
        for rate, _ in self.channels:
            if rate < 0:
                raise ValueError(f"Lindblad rate must be non-negative, got {rate}")


@dataclass(frozen=True)
class QuadraticPair:
    """rho' = C rho D+ + D rho C+ - {D+C, rho}/2 - {C+D, rho}/2 (not of Lindblad form)."""
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        for name, op in (("C", self.C), ("D", self.D)):
            if not np.allclose(op, np.conj(op).T, atol=HERMITIAN_TOL):
                raise ValueError(f"{name} must be self-adjoint")


@dataclass(frozen=True)
class OpenSystemModel:
    """
    Hamiltonian (constant or a function of time) plus its dissipation.
    Rates are time independent.
    """
    dim: int
    hamiltonian: Hamiltonian
    dissipation: Union[LindbladSet, QuadraticPair, None] = None

    def __post_init__(self):
        H = self.hamiltonian_at(0.0)
        if H.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"Hamiltonian shape {H.shape} does not match dim={self.dim}")
        if not np.allclose(H, H.conj().T, atol=HERMITIAN_TOL):
            raise ValueError("Hamiltonian must be Hermitian")

    def hamiltonian_at(self, t: float) -> np.ndarray:
        if callable(self.hamiltonian):
            return np.asarray(self.hamiltonian(t), dtype=complex)
        return np.asarray(self.hamiltonian, dtype=complex)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2).min())

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_valid(self, tol: float = 1e-10, positivity_tol: float = 1e-8) -> bool:
        return (self.hermiticity_defect() <= tol
                and abs(self.trace - 1.0) <= tol
                and self.min_eigenvalue >= -positivity_tol)


@dataclass
class EffectiveGenerator:
    matrix: np.ndarray
    parts: Dict[str, np.ndarray] = field(default_factory=dict)


def _basis_matrix(dim: int, basis: Optional[np.ndarray]) -> np.ndarray:
    if basis is None:
        return np.eye(dim, dtype=complex)
    basis = np.asarray(basis, dtype=complex)
    if basis.shape != (dim, dim):
        raise DimensionMismatch(f"basis shape {basis.shape} does not match dim={dim}")
    return basis


def vectorize(rho: np.ndarray, basis: Optional[np.ndarray] = None) -> np.ndarray:
    """Doubled ket of rho; ``basis`` holds the |E_m> as columns (default: standard basis)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got {rho.shape}")
    B = _basis_matrix(rho.shape[0], basis)
    return (B.conj().T @ rho @ B).ravel()


def devectorize(vec: np.ndarray, basis: Optional[np.ndarray] = None) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    dim = int(round(math.sqrt(vec.size)))
    if dim * dim != vec.size:
        raise DimensionMismatch(f"vector of length {vec.size} is not a doubled ket")
    B = _basis_matrix(dim, basis)
    return B @ vec.reshape(dim, dim) @ B.conj().T


def trace_vector(dim: int) -> np.ndarray:
    """<<I| such that trace_vector(N) @ vectorize(rho) = trace(rho)."""
    return np.eye(dim, dtype=complex).ravel()


def ancilla_conjugate(O: np.ndarray) -> np.ndarray:
    """O^A with (O^A)_mn = <E_n|O+|E_m>, the entrywise conjugate in the fixed basis."""
    O = np.asarray(O, dtype=complex)
    if O.ndim != 2 or O.shape[0] != O.shape[1]:
        raise DimensionMismatch(f"operator must be square, got {O.shape}")
    return O.conj()


def left_super(A: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> A rho."""
    return np.kron(A, np.eye(A.shape[0]))


def right_super(B: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho B."""
    return np.kron(np.eye(B.shape[0]), np.asarray(B).T)


def build_LS(gamma: float, jump: np.ndarray) -> np.ndarray:
    """
    i * gamma * (J kron J^A - (J+J) kron I / 2 - I kron (J+J)^A / 2).

    Only the first term couples system and ancilla.
    """
    if gamma < 0:
        raise ValueError(f"rate must be non-negative, got {gamma}")
    J = np.asarray(jump, dtype=complex)
    JdJ = J.conj().T @ J
    I = np.eye(J.shape[0])
    return 1j * gamma * (np.kron(J, ancilla_conjugate(J))
                         - 0.5 * np.kron(JdJ, I)
                         - 0.5 * np.kron(I, ancilla_conjugate(JdJ)))


def build_LQ(C: np.ndarray, D: np.ndarray) -> np.ndarray:
    """i times the superoperator of the quadratic C/D generator."""
    C = np.asarray(C, dtype=complex)
    D = np.asarray(D, dtype=complex)
    DC = D.conj().T @ C
    CD = C.conj().T @ D
    sup = (left_super(C) @ right_super(D.conj().T) + left_super(D) @ right_super(C.conj().T)
           - 0.5 * (left_super(DC) + right_super(DC))
           - 0.5 * (left_super(CD) + right_super(CD)))
    return 1j * sup


def dissipator(model: OpenSystemModel, rho: np.ndarray) -> np.ndarray:
    """The dissipative part of d(rho)/dt."""
    diss = model.dissipation
    if diss is None:
        return np.zeros_like(rho, dtype=complex)
    if isinstance(diss, LindbladSet):
        out = np.zeros_like(rho, dtype=complex)
        for gamma, J in diss.channels:
            JdJ = J.conj().T @ J
            out += gamma * (J @ rho @ J.conj().T - 0.5 * (JdJ @ rho + rho @ JdJ))
        return out
    if isinstance(diss, QuadraticPair):
        C, D = diss.C, diss.D
        DC = D.conj().T @ C
        CD = C.conj().T @ D
        return (C @ rho @ D.conj().T + D @ rho @ C.conj().T
                - 0.5 * (DC @ rho + rho @ DC) - 0.5 * (CD @ rho + rho @ CD))
    raise UnsupportedDissipator(f"unsupported dissipation type {type(diss).__name__}")


def master_rhs(model: OpenSystemModel, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
    """-i[H(t), rho] + L rho"""
    H = model.hamiltonian_at(t)
    return -1j * (H @ rho - rho @ H) + dissipator(model, rho)


def dissipative_part(model: OpenSystemModel) -> np.ndarray:
    diss = model.dissipation
    N = model.dim
    if diss is None:
        return np.zeros((N * N, N * N), dtype=complex)
    if isinstance(diss, LindbladSet):
        out = np.zeros((N * N, N * N), dtype=complex)
        for gamma, J in diss.channels:
            out += build_LS(gamma, J)
        return out
    if isinstance(diss, QuadraticPair):
        return build_LQ(diss.C, diss.D)
    raise UnsupportedDissipator(f"unsupported dissipation type {type(diss).__name__}")


def build_effective_generator(model: OpenSystemModel, t: float = 0.0) -> EffectiveGenerator:
    """H_T = H kron I - I kron H^A + L at time t."""
    H = model.hamiltonian_at(t)
    I = np.eye(model.dim)
    system = np.kron(H, I)
    ancilla = np.kron(I, ancilla_conjugate(H))
    diss = dissipative_part(model)
    return EffectiveGenerator(system - ancilla + diss,
                              {"system": system, "ancilla": ancilla, "dissipative": diss})


def generator_function(model: OpenSystemModel) -> Callable[[float], np.ndarray]:
    """t -> H_T(t); the dissipative part is assembled once."""
    diss = dissipative_part(model)
    I = np.eye(model.dim)
    if not callable(model.hamiltonian):
        fixed = build_effective_generator(model).matrix
        return lambda t: fixed

    def at(t: float) -> np.ndarray:
        H = model.hamiltonian_at(t)
        return np.kron(H, I) - np.kron(I, H.conj()) + diss

    return at


def default_steps(T: float) -> int:
    return max(1, int(math.ceil(STEPS_PER_UNIT * abs(T))))


def evolve_direct(rho0: np.ndarray, model: OpenSystemModel, T: float, steps: Optional[int] = None,
                  observer: Optional[Callable[[float, np.ndarray], None]] = None) -> np.ndarray:
    """RK4 on d(rho)/dt = -i[H(t), rho] + L rho, without vectorization."""
    steps = steps or default_steps(T)
    h = T / steps
    rho = np.array(rho0, dtype=complex)
    if observer is not None:
        observer(0.0, rho)
    for step in range(steps):
        t = step * h
        k1 = master_rhs(model, rho, t)
        k2 = master_rhs(model, rho + k1 * (h / 2), t + h / 2)
        k3 = master_rhs(model, rho + k2 * (h / 2), t + h / 2)
        k4 = master_rhs(model, rho + k3 * h, t + h)
        rho = rho + (k1 + 2 * k2 + 2 * k3 + k4) * (h / 6)
        if not np.all(np.isfinite(rho)) or np.max(np.abs(rho)) > 1e12:
            logger.error(f"Density matrix overflow at t={t + h:.6g}")
            raise StepOverflow("density matrix exceeded 1e12", time=t + h)
        if observer is not None:
            observer(t + h, rho)
    _log_physicality(rho)
    return rho


def evolve_vectorized(rho0: np.ndarray, model: OpenSystemModel, T: float, steps: Optional[int] = None,
                      observer: Optional[Callable[[float, np.ndarray], None]] = None) -> np.ndarray:
    """Same evolution through propagate on the doubled ket under H_T."""
    if T == 0:
        return np.array(rho0, dtype=complex)
    steps = steps or default_steps(T)
    watch = None
    if observer is not None:
        watch = lambda t, psi: observer(t, devectorize(psi))
    psi = propagate(generator_function(model), vectorize(rho0), (0.0, T), T / steps, observer=watch)
    rho = devectorize(psi)
    _log_physicality(rho)
    return rho


def _log_physicality(rho: np.ndarray) -> None:
    dm = DensityMatrix(rho)
    if dm.hermiticity_defect() > 1e-9 or abs(dm.trace - 1.0) > 1e-9:
        logger.warning(f"Evolved state drifted: trace={dm.trace:.12g}, "
                       f"hermiticity defect={dm.hermiticity_defect():.3e}")
    elif dm.min_eigenvalue < -1e-8:
        logger.debug(f"Negative eigenvalue {dm.min_eigenvalue:.3e} in evolved state")
