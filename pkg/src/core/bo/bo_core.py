"""
Born-Oppenheimer objects of an open system in the effective-Hamiltonian picture.

Slow coordinates are stored as real numbers: the system coordinates x first,
then the ancilla coordinates x^A. The composite coordinate is r = (x, i x^A),
so a derivative with respect to an ancilla component of r is -i d/dx^A and the
r-Laplacian carries a minus sign on the ancilla block.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.core.errors import DiagonalRequest, NearDegenerate, SmallDenominator, TrackingAmbiguity
from src.core.linalg import DEGENERACY_THRESHOLD, eig_general
from src.core.liouville import ancilla_conjugate

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-4
SMALL_DENOMINATOR = 1e-10
MOMENTUM_WINDOW = 8

# (energies, rights as columns, lefts as columns) at one point
Frame = Tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class SlowPoint:
    coords: Tuple[float, ...]
    n_system: int
    angular: bool = True

    def __post_init__(self):
        values = tuple(float(c) for c in self.coords)
        if not all(math.isfinite(c) for c in values):
            raise ValueError(f"slow coordinates must be finite, got {values}")
        if self.angular:
            values = tuple(c % (2 * math.pi) for c in values)
        object.__setattr__(self, "coords", values)

    @property
    def weights(self) -> np.ndarray:
        """d/dr_mu = weight_mu * d/dcoord_mu, from r = (x, i x^A)."""
        n_anc = len(self.coords) - self.n_system
        return np.array([1.0] * self.n_system + [-1j] * n_anc, dtype=complex)

    def shifted(self, axis: int, h: float) -> np.ndarray:
        c = np.array(self.coords, dtype=float)
        c[axis] += h
        return c


@dataclass
class SlowVariableModel:
    """
    A spin block H_S^T depending on the slow coordinates.

    Args:
        block: coords -> H_S^T matrix
        n_system: number of leading coordinates that belong to the system
        mass: M in the kinetic term, shared by system and ancilla
        coord_scale: physical derivative per coordinate derivative (2*pi/L for an angle)
        potential: constant V^T
        eigensystem: optional coords -> (energies, rights, lefts) in a fixed gauge
    """
    block: Callable[[np.ndarray], np.ndarray]
    n_system: int
    mass: float = 1.0
    coord_scale: float = 1.0
    potential: complex = 0.0
    eigensystem: Optional[Callable[[np.ndarray], Frame]] = None

    @classmethod
    def from_parts(cls, system_hamiltonian: Callable[[np.ndarray], np.ndarray], dissipative: np.ndarray,
                   n_system: int, **kwargs) -> "SlowVariableModel":
        """H_S^T = H_S(x) kron I - I kron H_S^A(x^A) + L_S."""
        dissipative = np.asarray(dissipative, dtype=complex)

        def block(coords: np.ndarray) -> np.ndarray:
            coords = np.asarray(coords, dtype=float)
            H = np.asarray(system_hamiltonian(coords[:n_system]), dtype=complex)
            HA = ancilla_conjugate(np.asarray(system_hamiltonian(coords[n_system:]), dtype=complex))
            I = np.eye(H.shape[0])
            return np.kron(H, I) - np.kron(I, HA) + dissipative

        return cls(block=block, n_system=n_system, **kwargs)


def spin_block(model: SlowVariableModel, point: SlowPoint) -> np.ndarray:
    return np.asarray(model.block(np.array(point.coords)), dtype=complex)


def _reference_components(rights: np.ndarray) -> List[int]:
    refs = []
    for j in range(rights.shape[1]):
        mags = np.round(np.abs(rights[:, j]), 10)
        # ties go to the highest index
        refs.append(int(len(mags) - 1 - np.argmax(mags[::-1])))
    return refs


def _fix_gauge(rights: np.ndarray, lefts: np.ndarray, refs: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Make component refs[j] of right j real positive; lefts follow so <L|R> is unchanged."""
    rights = rights.copy()
    lefts = lefts.copy()
    for j, ref in enumerate(refs):
        c = rights[ref, j]
        if abs(c) < 1e-14:
            continue
        phase = abs(c) / c
        rights[:, j] *= phase
        lefts[:, j] *= phase
    return rights, lefts


def _raw_frame(model: SlowVariableModel, coords: np.ndarray, strict: bool) -> Frame:
    if model.eigensystem is not None:
        E, R, L = model.eigensystem(np.asarray(coords, dtype=float))
        return np.asarray(E, dtype=complex), np.asarray(R, dtype=complex), np.asarray(L, dtype=complex)
    spectrum = eig_general(model.block(np.asarray(coords, dtype=float)), strict=strict)
    return spectrum.values, spectrum.rights, spectrum.lefts


def _match(reference: np.ndarray, rights: np.ndarray) -> Tuple[np.ndarray, float]:
    """Column permutation of ``rights`` maximizing overlap with ``reference``; returns (perm, worst overlap)."""
    ref_n = reference / np.linalg.norm(reference, axis=0)
    new_n = rights / np.linalg.norm(rights, axis=0)
    overlap = np.abs(ref_n.conj().T @ new_n)
    rows, cols = linear_sum_assignment(-overlap)
    perm = np.empty(len(rows), dtype=int)
    perm[rows] = cols
    return perm, float(overlap[rows, cols].min())


def frame_at(model: SlowVariableModel, coords: np.ndarray, refs: Sequence[int],
             reference: Optional[np.ndarray] = None, strict: bool = False) -> Frame:
    """
    Gauge-fixed eigenframe at ``coords``. With an analytic eigensystem the level
    order is the model's; otherwise levels are matched to ``reference`` rights.
    """
    E, R, L = _raw_frame(model, coords, strict)
    if model.eigensystem is None and reference is not None:
        perm, worst = _match(reference, R)
        if worst < 0.5:
            raise TrackingAmbiguity(f"maximal overlap {worst:.3f} below 0.5", overlap=worst)
        E, R, L = E[perm], R[:, perm], L[:, perm]
    if model.eigensystem is None:
        R, L = _fix_gauge(R, L, refs)
    return E, R, L


@dataclass
class EigenBundle:
    model: SlowVariableModel
    grid: List[SlowPoint]
    energies: np.ndarray        # (points, levels)
    rights: np.ndarray          # (points, dim, levels)
    lefts: np.ndarray           # (points, dim, levels)
    refs: List[int]
    strict: bool = False
    step: float = DEFAULT_STEP
    richardson: bool = False

    @property
    def n_levels(self) -> int:
        return self.energies.shape[1]

    def frame(self, point: SlowPoint) -> Frame:
        """Eigenframe at an arbitrary point, levels matched to the nearest grid point."""
        coords = np.array(point.coords)
        for k, p in enumerate(self.grid):
            if np.allclose(p.coords, coords, atol=1e-15):
                return self.energies[k], self.rights[k], self.lefts[k]
        dists = [np.linalg.norm(np.array(p.coords) - coords) for p in self.grid]
        nearest = int(np.argmin(dists))
        return frame_at(self.model, coords, self.refs, reference=self.rights[nearest], strict=self.strict)


def build_bundle(model: SlowVariableModel, grid: Sequence[SlowPoint], strict: bool = False,
                 step: float = DEFAULT_STEP, richardson: bool = False) -> EigenBundle:
    """
    Eigenpairs of the spin block along ``grid``, tracked by maximal overlap.

    Raises:
        NearDegenerate: strict mode and a gap below threshold at some point
        TrackingAmbiguity: an adjacent-point overlap below 0.5
    """
    if not grid:
        raise ValueError("grid must be nonempty")
    grid = list(grid)
    E0, R0, L0 = _raw_frame(model, np.array(grid[0].coords), strict)
    if model.eigensystem is None:
        order = np.lexsort((E0.imag, E0.real))
        E0, R0, L0 = E0[order], R0[:, order], L0[:, order]
    refs = _reference_components(R0)
    if model.eigensystem is None:
        R0, L0 = _fix_gauge(R0, L0, refs)

    energies, rights, lefts = [E0], [R0], [L0]
    for point in grid[1:]:
        E, R, L = frame_at(model, np.array(point.coords), refs, reference=rights[-1], strict=strict)
        overlaps = np.einsum("ij,ij->j", rights[-1].conj(), R)
        if np.any(overlaps.real <= 0):
            # the reference component passed through zero between grid points
            logger.warning(f"Gauge continuity broken at {point.coords}; refine the grid")
        energies.append(E)
        rights.append(R)
        lefts.append(L)

    energies = np.array(energies)
    if strict:
        norm_scale = max(np.abs(energies).max(), 1.0)
        for k, row in enumerate(energies):
            gaps = np.abs(row[:, None] - row[None, :]) + np.eye(len(row)) * np.inf
            if gaps.min() < DEGENERACY_THRESHOLD * norm_scale:
                logger.error(f"Degenerate levels at grid point {grid[k].coords}")
                raise NearDegenerate("degenerate levels on the grid", gap=float(gaps.min()))
    logger.info(f"Built eigenbundle: {len(grid)} points, {energies.shape[1]} levels")
    return EigenBundle(model, grid, energies, np.array(rights), np.array(lefts), refs, strict, step, richardson)


def _stencil_derivatives(bundle: EigenBundle, point: SlowPoint, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Central differences of the gauge-fixed rights: (d R, d^2 R), each (coords, dim, levels)."""
    E, R, L = bundle.frame(point)
    d1, d2 = [], []
    for axis in range(len(point.coords)):
        _, Rp, _ = frame_at(bundle.model, point.shifted(axis, h), bundle.refs, reference=R, strict=bundle.strict)
        _, Rm, _ = frame_at(bundle.model, point.shifted(axis, -h), bundle.refs, reference=R, strict=bundle.strict)
        d1.append((Rp - Rm) / (2 * h))
        d2.append((Rp - 2 * R + Rm) / (h * h))
    return np.array(d1), np.array(d2)


def eigenvector_derivatives(bundle: EigenBundle, point: SlowPoint) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coordinate derivatives of the right eigenvectors, optionally Richardson
    extrapolated from steps h and h/2.
    """
    d1, d2 = _stencil_derivatives(bundle, point, bundle.step)
    if bundle.richardson:
        e1, e2 = _stencil_derivatives(bundle, point, bundle.step / 2)
        d1 = (4 * e1 - d1) / 3
        d2 = (4 * e2 - d2) / 3
    return d1, d2


@dataclass(frozen=True)
class GeometricTerms:
    """
    <L_n| d_mu R_m> and <L_n| Laplacian_r R_m> in r-coordinates at one point.

    first[mu, n, m], laplacian[n, m].
    """
    energies: np.ndarray
    first: np.ndarray
    laplacian: np.ndarray


def geometric_terms(bundle: EigenBundle, point: SlowPoint) -> GeometricTerms:
    E, R, L = bundle.frame(point)
    d1, d2 = eigenvector_derivatives(bundle, point)
    w = point.weights * bundle.model.coord_scale
    first = np.array([w[mu] * (L.conj().T @ d1[mu]) for mu in range(len(w))])
    laplacian = sum(w[mu] ** 2 * (L.conj().T @ d2[mu]) for mu in range(len(w)))
    return GeometricTerms(E, first, laplacian)


def connection(bundle: EigenBundle, n: int, point: SlowPoint) -> np.ndarray:
    """A^T_r(n) = i <L_n|grad_r R_n>, one complex component per slow coordinate."""
    terms = geometric_terms(bundle, point)
    return 1j * terms.first[:, n, n]


def geometric_F(bundle: EigenBundle, n: int, point: SlowPoint) -> complex:
    """-(1/2M) sum_{m != n} <L_n|grad R_m> . <L_m|grad R_n>"""
    terms = geometric_terms(bundle, point)
    total = 0j
    for m in range(bundle.n_levels):
        if m == n:
            continue
        total += np.sum(terms.first[:, n, m] * terms.first[:, m, n])
    return complex(-total / (2 * bundle.model.mass))


def first_order_energy(bundle: EigenBundle, n: int, point: SlowPoint) -> complex:
    """E^[1](n) = F^T(n)"""
    return geometric_F(bundle, n, point)


@dataclass(frozen=True)
class OCoupling:
    """O^T(n, m) = first_deriv_coeff . grad_r + scalar_part"""
    n: int
    m: int
    first_deriv_coeff: np.ndarray
    scalar_part: complex


def _coupling_from_terms(terms: GeometricTerms, n: int, m: int, mass: float) -> OCoupling:
    return OCoupling(n, m, -terms.first[:, n, m] / mass, complex(-terms.laplacian[n, m] / (2 * mass)))


def coupling_O(bundle: EigenBundle, n: int, m: int, point: SlowPoint) -> OCoupling:
    if n == m:
        raise DiagonalRequest(f"O^T is off-diagonal; got n = m = {n}")
    return _coupling_from_terms(geometric_terms(bundle, point), n, m, bundle.model.mass)


@dataclass(frozen=True)
class ZerothOrderHamiltonian:
    """H^T(n) = -(1/2M)(grad_r - i A)^2 + V^T + E_n for locally constant A, E_n."""
    n: int
    kinetic_prefactor: float
    connection: np.ndarray
    potential: complex
    energy: complex
    n_system: int

    def gradient(self, momenta: Sequence[float]) -> np.ndarray:
        """Eigenvalues of grad_r on exp(i k.x + i k^A.x^A)."""
        k = np.asarray(momenta, dtype=complex)
        g = 1j * k
        g[self.n_system:] = k[self.n_system:]
        return g

    def plane_wave_energy(self, momenta: Sequence[float]) -> complex:
        shifted = self.gradient(momenta) - 1j * self.connection
        return complex(-self.kinetic_prefactor * np.sum(shifted ** 2) + self.potential + self.energy)


def zeroth_hamiltonian(bundle: EigenBundle, n: int, point: Optional[SlowPoint] = None) -> ZerothOrderHamiltonian:
    point = point or bundle.grid[0]
    terms = geometric_terms(bundle, point)
    return ZerothOrderHamiltonian(n, 1.0 / (2 * bundle.model.mass), 1j * terms.first[:, n, n],
                                  complex(bundle.model.potential), complex(terms.energies[n]), point.n_system)


@dataclass(frozen=True)
class Channel:
    n: int
    m: int
    k: Tuple[float, ...]
    k_prime: Tuple[float, ...]
    numerator: complex
    denominator: complex

    @property
    def ratio(self) -> complex:
        return self.numerator / self.denominator


def covariant_terms(terms: GeometricTerms) -> Tuple[np.ndarray, np.ndarray]:
    """
    Parts of <L_m|O R_n> that pick up lambda_n/lambda_m under R_n -> lambda_n R_n,
    L_n -> L_n/conj(lambda_n), with lambda_n any smooth nonzero function:

        first[mu, m, n]                                      (m != n)
        laplacian[m, n] - 2 sum_mu first[mu, n, n] first[mu, m, n]

    Diagonal entries are zeroed; they belong to A^T and E^[1].
    """
    first = terms.first.copy()
    idx = np.arange(first.shape[1])
    own = first[:, idx, idx]                     # (coords, levels)
    second = terms.laplacian - 2 * np.einsum("un,umn->mn", own, first)
    first[:, idx, idx] = 0
    second[idx, idx] = 0
    return first, second


def loop_gauge(bundle: EigenBundle) -> Tuple[np.ndarray, np.ndarray]:
    """
    Factors c[k, n] with R_n -> c R_n, L_n -> L_n/conj(c) at grid point k that
    give unit-norm rights, parallel transported from point to point, with the
    closing phase of every level spread evenly over the loop. The result does
    not depend on the gauge the bundle was built in. Also returns the closing
    phase per level.

    Raises:
        TrackingAmbiguity: a level has vanishing overlap between neighbouring points
    """
    K = len(bundle.grid)
    c = np.zeros((K, bundle.n_levels), dtype=complex)
    c[0] = 1.0 / np.linalg.norm(bundle.rights[0], axis=0)
    for k in range(1, K):
        overlap = np.einsum("ij,ij->j", bundle.lefts[k - 1].conj(), bundle.rights[k]) / c[k - 1]
        if np.any(np.abs(overlap) < 1e-12):
            raise TrackingAmbiguity("vanishing overlap between neighbouring grid points",
                                    overlap=float(np.abs(overlap).min()))
        c[k] = np.abs(overlap) / overlap / np.linalg.norm(bundle.rights[k], axis=0)
    closing = np.einsum("ij,ij->j", bundle.lefts[-1].conj(), bundle.rights[0]) * c[0] / c[-1]
    holonomy = np.angle(closing) if K > 1 else np.zeros(bundle.n_levels)
    c *= np.exp(1j * np.outer(np.arange(K), holonomy) / K)
    return c, holonomy


def _loop_period(grid: Sequence[SlowPoint]) -> np.ndarray:
    """Coordinate displacement around the closed loop, K times the first step."""
    if len(grid) == 1:
        return np.zeros(len(grid[0].coords))
    step = np.array(grid[1].coords) - np.array(grid[0].coords)
    if grid[0].angular:
        step = np.angle(np.exp(1j * step))
    return len(grid) * step


def _mean_connection(bundle: EigenBundle, samples: Sequence[GeometricTerms]) -> np.ndarray:
    """
    Loop-averaged A^T per level, (levels, coords). Only the component along the
    loop is fixed by the loop data; it comes from the integral of <L_n|dR_n>,
    with its imaginary part taken mod 2*pi so that windings of the input gauge drop out.
    """
    w = bundle.grid[0].weights * bundle.model.coord_scale
    idx = np.arange(bundle.n_levels)
    local = np.array([t.first[:, idx, idx].T for t in samples]) / w       # (points, levels, coords)
    period = _loop_period(bundle.grid)
    length2 = float(period @ period)
    if length2 == 0:
        return 1j * local[0] * w
    integral = local.sum(axis=0) @ period / len(samples)
    integral = integral.real + 1j * np.angle(np.exp(1j * integral.imag))
    return 1j * np.outer(integral, period) / length2 * w


@dataclass
class LoopAverages:
    """
    Fourier data of the covariant couplings along a closed grid loop, in the
    loop gauge of ``loop_gauge``.
    """
    harmonics: List[int]
    first: np.ndarray          # (harmonics, coords, levels, levels)
    second: np.ndarray         # (harmonics, levels, levels)
    hamiltonians: List[ZerothOrderHamiltonian]
    holonomy: np.ndarray

    def zero_harmonic(self) -> Tuple[np.ndarray, np.ndarray]:
        q0 = self.harmonics.index(0)
        return self.first[q0], self.second[q0]


def loop_averages(bundle: EigenBundle, max_harmonic: int = MOMENTUM_WINDOW) -> LoopAverages:
    """
    Harmonics of the couplings along the grid, taken as one period of a closed
    loop. A harmonic q transfers q momentum quanta 2*pi/L (coord_scale) between
    plane waves; a grid of K points resolves |q| <= (K-1)//2.
    """
    samples = [geometric_terms(bundle, p) for p in bundle.grid]
    K = len(samples)
    c, holonomy = loop_gauge(bundle)
    firsts, seconds = [], []
    for k, terms in enumerate(samples):
        first, second = covariant_terms(terms)
        factor = c[k][None, :] / c[k][:, None]       # [m, n] = c_n / c_m
        firsts.append(first * factor)
        seconds.append(second * factor)
    firsts, seconds = np.array(firsts), np.array(seconds)
    top = min(max_harmonic, (K - 1) // 2)
    harmonics = list(range(-top, top + 1))
    s = 2 * np.pi * np.arange(K) / K
    first_q, second_q = [], []
    for q in harmonics:
        phase = np.exp(-1j * q * s)
        first_q.append(np.tensordot(phase, firsts, axes=(0, 0)) / K)
        second_q.append(np.tensordot(phase, seconds, axes=(0, 0)) / K)
    connections = _mean_connection(bundle, samples)
    mean_E = np.array([t.energies for t in samples]).mean(axis=0)
    hams = [ZerothOrderHamiltonian(n, 1.0 / (2 * bundle.model.mass), connections[n],
                                   complex(bundle.model.potential), complex(mean_E[n]), bundle.grid[0].n_system)
            for n in range(bundle.n_levels)]
    logger.debug(f"Loop averages: {K} points, harmonics up to {top}, holonomy {np.round(holonomy, 6)}")
    return LoopAverages(harmonics, np.array(first_q), np.array(second_q), hams, holonomy)


def _channel(averages: LoopAverages, n: int, m: int, k: Tuple[float, ...], qi: int, quantum: float,
             mass: float, extra: Optional[Callable[[int, int, int], complex]] = None) -> Channel:
    q = averages.harmonics[qi]
    k_prime = tuple(np.asarray(k) + q * quantum)
    ham_n = averages.hamiltonians[n]
    kinetic = ham_n.gradient(k) - 1j * ham_n.connection
    numerator = -(2 * np.sum(averages.first[qi][:, m, n] * kinetic) + averages.second[qi][m, n]) / (2 * mass)
    if extra is not None:
        numerator += extra(m, n, q)
    denominator = averages.hamiltonians[m].plane_wave_energy(k_prime) - ham_n.plane_wave_energy(k)
    return Channel(n, m, tuple(k), k_prime, complex(numerator), complex(denominator))


def first_order_correction(bundle: EigenBundle, n: int, k: Sequence[float],
                           averages: Optional[LoopAverages] = None) -> List[Channel]:
    """
    First-order admixture of the plane wave (n, k) into every (m != n, k').

    Raises:
        SmallDenominator: a channel with nonzero coupling has |denominator| < 1e-10
    """
    averages = averages or loop_averages(bundle)
    quantum = bundle.model.coord_scale
    channels = []
    for m in range(bundle.n_levels):
        if m == n:
            continue
        for qi in range(len(averages.harmonics)):
            ch = _channel(averages, n, m, tuple(k), qi, quantum, bundle.model.mass)
            if abs(ch.denominator) < SMALL_DENOMINATOR:
                if abs(ch.numerator) < 1e-14:
                    continue
                logger.error(f"Small denominator in channel {n}->{m}, k={k}")
                raise SmallDenominator("energy denominator below 1e-10", denominator=ch.denominator)
            channels.append(ch)
    return channels


@dataclass
class ValidityReport:
    channels: List[Channel]
    gamma: float
    normalized: Optional[float] = None
    excluded: int = 0
    notes: List[str] = field(default_factory=list)

    def normalize(self, gamma0: float) -> "ValidityReport":
        self.normalized = self.gamma / gamma0 if gamma0 > 0 else math.nan
        return self


def enumerate_channels(averages: LoopAverages, k: Sequence[float], quantum: float, mass: float,
                       extra: Optional[Callable[[int, int, int], complex]] = None) -> Tuple[List[Channel], int]:
    """Every (n, k) -> (m != n, k + q*quantum) channel; returns (kept, number excluded as small-denominator)."""
    n_levels = len(averages.hamiltonians)
    kept, excluded = [], 0
    for n in range(n_levels):
        for m in range(n_levels):
            if m == n:
                continue
            for qi in range(len(averages.harmonics)):
                ch = _channel(averages, n, m, tuple(k), qi, quantum, mass, extra)
                if abs(ch.denominator) < SMALL_DENOMINATOR:
                    excluded += 1
                    continue
                kept.append(ch)
    return kept, excluded


def report_from_channels(kept: List[Channel], excluded: int, gamma0: Optional[float] = None,
                         notes: Sequence[str] = ()) -> ValidityReport:
    if not kept:
        raise SmallDenominator("every channel has a vanishing energy denominator")
    gamma = max(abs(ch.ratio) for ch in kept)
    notes = list(notes) + [f"{excluded} channels excluded (|denominator| < 1e-10)"]
    report = ValidityReport(kept, float(gamma), excluded=excluded, notes=notes)
    if gamma0 is not None:
        report.normalize(gamma0)
    return report


def gamma_measure(bundle: EigenBundle, k_center: Sequence[float], gamma0: Optional[float] = None,
                  window: int = MOMENTUM_WINDOW, averages: Optional[LoopAverages] = None) -> ValidityReport:
    """
    Gamma = max |<Phi_k'(m)|O(m,n)|Phi_k(n)> / (E_k'(m) - E_k(n))| over m != n and
    outgoing momenta k' within ``window`` quanta of the incoming ``k_center``;
    normalized by ``gamma0`` when given. The ancilla momentum enters conjugated,
    so a co-moving wave packet has k_center = (k_z, -k_z).
    """
    averages = averages or loop_averages(bundle, window)
    quantum = bundle.model.coord_scale
    kept, excluded = enumerate_channels(averages, k_center, quantum, bundle.model.mass)
    top = max(averages.harmonics)
    return report_from_channels(kept, excluded, gamma0, [f"outgoing momenta within +/-{top} quanta of k"])
