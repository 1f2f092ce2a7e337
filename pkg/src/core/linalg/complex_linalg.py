import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eig, expm

from src.core.errors import ConvergenceFailure, NearDegenerate, SingularPairing, StepOverflow

logger = logging.getLogger(__name__)

# gap < DEGENERACY_THRESHOLD * ||A|| counts as degenerate
DEGENERACY_THRESHOLD = 1e-8
OVERFLOW_LIMIT = 1e12
MAX_DIMENSION = 64

Generator = Union[np.ndarray, Callable[[float], np.ndarray]]


@dataclass(frozen=True)
class EigenPair:
    """
    One eigenvalue with its right eigenvector and left eigenvector.

    ``left`` is stored as a ket: the row eigenvector is ``left.conj()``, so
    ``left.conj() @ A == value * left.conj()``.
    """
    value: complex
    right: np.ndarray
    left: np.ndarray

    def overlap(self, other: "EigenPair") -> complex:
        """<left_self|right_other>"""
        return complex(np.vdot(self.left, other.right))


@dataclass(frozen=True)
class Spectrum:
    pairs: Tuple[EigenPair, ...]
    gap: float

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs], dtype=complex)

    @property
    def rights(self) -> np.ndarray:
        """Right eigenvectors as columns."""
        return np.column_stack([p.right for p in self.pairs])

    @property
    def lefts(self) -> np.ndarray:
        """Left eigenvectors (kets) as columns."""
        return np.column_stack([p.left for p in self.pairs])

    def overlap_matrix(self) -> np.ndarray:
        return self.lefts.conj().T @ self.rights

    def __len__(self) -> int:
        return len(self.pairs)


def _cbrt(z: complex) -> complex:
    # principal cube root in polar form, stable for complex arguments
    r = abs(z)
    if r == 0.0:
        return 0j
    theta = cmath.phase(z)
    return (r ** (1.0 / 3.0)) * complex(math.cos(theta / 3.0), math.sin(theta / 3.0))


def _cubic_value(c2: complex, c1: complex, c0: complex, x: complex) -> Tuple[complex, complex]:
    f = ((x + c2) * x + c1) * x + c0
    df = (3.0 * x + 2.0 * c2) * x + c1
    return f, df


def solve_cubic(c2: complex, c1: complex, c0: complex) -> np.ndarray:
    """
    Roots of the monic cubic x^3 + c2 x^2 + c1 x + c0, with multiplicity.

    Cardano on the depressed cubic; the second cube root is taken as
    v = -p/(3u) so that u*v = -p/3 holds on every branch. Each root gets one
    complex Newton step, kept only when it lowers the residual.
    """
    c2, c1, c0 = complex(c2), complex(c1), complex(c0)
    shift = c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0

    disc = cmath.sqrt(q * q / 4.0 + p ** 3 / 27.0)
    u3 = -q / 2.0 + disc
    if abs(-q / 2.0 - disc) > abs(u3):
        u3 = -q / 2.0 - disc
    u = _cbrt(u3)

    omega = complex(-0.5, math.sqrt(3.0) / 2.0)
    roots = []
    for k in range(3):
        uk = u * omega ** k
        if abs(uk) < 1e-300:
            y = 0j
        else:
            y = uk - p / (3.0 * uk)
        roots.append(y - shift)

    polished = []
    for r in roots:
        f, df = _cubic_value(c2, c1, c0, r)
        if df != 0:
            candidate = r - f / df
            fc, _ = _cubic_value(c2, c1, c0, candidate)
            if abs(fc) < abs(f):
                r = candidate
        polished.append(r)
    return np.array(polished, dtype=complex)


def cubic_residual(c2: complex, c1: complex, c0: complex, root: complex) -> float:
    """|f(r)| / max(1, |r|^3)"""
    f, _ = _cubic_value(complex(c2), complex(c1), complex(c0), complex(root))
    return abs(f) / max(1.0, abs(root) ** 3)


def spectral_gap(values: Sequence[complex]) -> float:
    values = np.asarray(values, dtype=complex)
    if len(values) < 2:
        return math.inf
    diffs = np.abs(values[:, None] - values[None, :])
    diffs[np.diag_indices(len(values))] = np.inf
    return float(diffs.min())


def biorthonormalize(rights: Sequence[np.ndarray], lefts: Sequence[np.ndarray]) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """
    Rescale the left vectors so that <left'_m|right_n> = delta_mn.

    The right vectors are returned unchanged. Within an exactly degenerate
    block the lefts are recombined, which keeps them left eigenvectors.

    Raises:
        SingularPairing: the left/right overlap matrix is rank-deficient
    """
    if len(rights) != len(lefts):
        raise SingularPairing(f"{len(rights)} right vectors but {len(lefts)} left vectors")
    R = np.column_stack([np.asarray(r, dtype=complex) for r in rights])
    L = np.column_stack([np.asarray(l, dtype=complex) for l in lefts])
    S = L.conj().T @ R
    if not np.all(np.isfinite(S)) or np.linalg.cond(S) > 1e12:
        raise SingularPairing("left/right overlap matrix is numerically singular")
    L_new = L @ np.linalg.inv(S).conj().T
    return [R[:, i].copy() for i in range(R.shape[1])], [L_new[:, i].copy() for i in range(L_new.shape[1])]


def eig_general(A: np.ndarray, tol: float = 1e-9, strict: bool = False) -> Spectrum:
    """
    Full left/right eigen-decomposition of a general complex matrix.

    Args:
        A: square matrix, dimension at most 64
        tol: relative residual tolerance, ||A r - lambda r|| <= tol*||A||
        strict: raise NearDegenerate when the smallest gap is below
            DEGENERACY_THRESHOLD*||A||

    Returns:
        Spectrum with unit-norm right vectors and biorthonormal left vectors
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"eig_general needs a square matrix, got shape {A.shape}")
    if A.shape[0] > MAX_DIMENSION:
        raise ValueError(f"dimension {A.shape[0]} exceeds {MAX_DIMENSION}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")

    norm = max(np.linalg.norm(A, 2), 1e-300)
    values, vl, vr = eig(A, left=True, right=True)
    gap = spectral_gap(values)
    if strict and gap < DEGENERACY_THRESHOLD * norm:
        logger.error(f"Near-degenerate spectrum: gap={gap:.3e}, norm={norm:.3e}")
        raise NearDegenerate(f"eigenvalue gap {gap:.3e} below threshold", gap=gap)

    rights = [vr[:, i] / np.linalg.norm(vr[:, i]) for i in range(len(values))]
    lefts = [vl[:, i] for i in range(len(values))]
    rights, lefts = biorthonormalize(rights, lefts)

    pairs = []
    for value, r, l in zip(values, rights, lefts):
        res_r = np.linalg.norm(A @ r - value * r)
        res_l = np.linalg.norm(l.conj() @ A - value * l.conj()) / max(np.linalg.norm(l), 1e-300)
        if max(res_r, res_l) > tol * norm:
            logger.error(f"Eigen-residual {max(res_r, res_l):.3e} exceeds {tol * norm:.3e}")
            raise ConvergenceFailure("eigen-residual above tolerance", residual=max(res_r, res_l))
        pairs.append(EigenPair(complex(value), r, l))
    return Spectrum(tuple(pairs), gap)


def _as_callable(generator: Generator) -> Callable[[float], np.ndarray]:
    if callable(generator):
        return generator
    fixed = np.asarray(generator, dtype=complex)
    return lambda t: fixed


def propagate(generator: Generator, psi0: np.ndarray, t_span: Tuple[float, float], dt: float,
              observer: Optional[Callable[[float, np.ndarray], None]] = None) -> np.ndarray:
    """
    Fixed-step RK4 for i d(psi)/dt = H(t) psi, H possibly non-Hermitian.

    The step is shrunk so that an integer number of steps covers t_span.
    ``observer(t, psi)`` is called at the start and after every step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    H = _as_callable(generator)
    t0, t1 = float(t_span[0]), float(t_span[1])
    psi = np.array(psi0, dtype=complex)
    n_steps = max(1, int(math.ceil(abs(t1 - t0) / dt - 1e-12)))
    h = (t1 - t0) / n_steps

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return -1j * (H(t) @ y)

    if observer is not None:
        observer(t0, psi)
    for step in range(n_steps):
        t = t0 + step * h
        k1 = rhs(t, psi)
        k2 = rhs(t + h / 2, psi + k1 * (h / 2))
        k3 = rhs(t + h / 2, psi + k2 * (h / 2))
        k4 = rhs(t + h, psi + k3 * h)
        psi = psi + (k1 + 2 * k2 + 2 * k3 + k4) * (h / 6)
        if not np.all(np.isfinite(psi)) or np.max(np.abs(psi)) > OVERFLOW_LIMIT:
            logger.error(f"Runaway growth at t={t + h:.6g}")
            raise StepOverflow("state amplitude exceeded 1e12", time=t + h)
        if observer is not None:
            observer(t + h, psi)
    return psi


def relax(generator: np.ndarray, psi0: np.ndarray, t: float) -> np.ndarray:
    """Exact evolution exp(-i H t) psi0 for a constant generator."""
    return expm(-1j * np.asarray(generator, dtype=complex) * t) @ np.asarray(psi0, dtype=complex)


def propagate_constant(generator: np.ndarray, psi0: np.ndarray, t_span: Tuple[float, float], steps: int,
                       observer: Optional[Callable[[float, np.ndarray], None]] = None) -> np.ndarray:
    """
    exp(-i H t) psi0 taken in ``steps`` equal exact steps, so the observer sees
    the same sampling as in ``propagate``.
    """
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    h = (t1 - t0) / steps
    step = expm(-1j * np.asarray(generator, dtype=complex) * h)
    psi = np.array(psi0, dtype=complex)
    if observer is not None:
        observer(t0, psi)
    for k in range(1, steps + 1):
        psi = step @ psi
        if not np.all(np.isfinite(psi)) or np.max(np.abs(psi)) > OVERFLOW_LIMIT:
            logger.error(f"Runaway growth at t={t0 + k * h:.6g}")
            raise StepOverflow("state amplitude exceeded 1e12", time=t0 + k * h)
        if observer is not None:
            observer(t0 + k * h, psi)
    return psi
