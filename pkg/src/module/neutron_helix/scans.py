"""
Parameter scans over the helical-field model. Cells are independent and may
run on a thread pool; rows always come back in grid order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from src.core.bo import gamma_measure
from src.core.disscom import (
    DissCOMRates,
    build_CD,
    build_LC,
    cd_rhs,
    disscom_rhs,
    disscom_validity,
    oscillator_validity,
    xp_matrices,
)
from src.core.errors import ConfigError
from src.core.liouville import devectorize, vectorize
from src.core.table import ScanTable

from .helical_model import (
    DriveProtocol,
    HelicalModel,
    closed_system_conditions,
    pair_bundle,
    parameters_from_conditions,
    polarization_run,
    validity_bundle,
)

logger = logging.getLogger(__name__)

T_UNIT = "pi/muB"
Cell = TypeVar("Cell")

# the g -> 0 limit; at g = 0 two levels cross and their channel drops out
MIN_RATE = 1e-3


def _map_cells(fn: Callable[[Cell], Sequence[float]], cells: List[Cell], jobs: int = 1) -> List[Sequence[float]]:
    if jobs <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, cells))


def pz_surface(model: HelicalModel, g_grid: Sequence[float], T_grid: Sequence[float],
               steps: Optional[int] = None, jobs: int = 1, picture: str = "bo") -> ScanTable:
    """P_z(T) over a (g, T) grid, g-major."""
    if len(g_grid) == 0 or len(T_grid) == 0:
        raise ConfigError("pz_surface needs nonempty g and T grids")
    cells = [(float(g), float(T)) for g in g_grid for T in T_grid]

    def run(cell: Tuple[float, float]) -> Sequence[float]:
        g, T = cell
        trace = polarization_run(model.with_g(g), DriveProtocol(T), steps, picture)
        return g, T, trace.final

    rows = _map_cells(run, cells, jobs)
    logger.info(f"P_z surface finished: {len(rows)} cells")
    return ScanTable.from_rows(["g", "T", "P_z"], rows, {"g": "1", "T": T_UNIT, "P_z": "1"})


def pz_vs_gT(model: HelicalModel, g_list: Sequence[float], gT_grid: Sequence[float],
             steps: Optional[int] = None, jobs: int = 1, picture: str = "bo") -> ScanTable:
    """P_z against the product gT, with T = gT/g; gT = 0 is the untouched initial state."""
    if len(g_list) == 0 or len(gT_grid) == 0:
        raise ConfigError("pz_vs_gT needs nonempty g and gT grids")
    if any(g <= 0 for g in g_list):
        raise ConfigError("pz_vs_gT needs positive g values")
    cells = [(float(g), float(gT)) for g in g_list for gT in gT_grid]

    def run(cell: Tuple[float, float]) -> Sequence[float]:
        g, gT = cell
        if gT == 0:
            return g, gT, 1.0
        trace = polarization_run(model.with_g(g), DriveProtocol(gT / g), steps, picture)
        return g, gT, trace.final

    rows = _map_cells(run, cells, jobs)
    logger.info(f"P_z(gT) scan finished: {len(rows)} cells")
    return ScanTable.from_rows(["g", "gT", "P_z"], rows, {"g": "1", "gT": T_UNIT, "P_z": "1"})


def gamma_scan(model: HelicalModel, g_grid: Sequence[float], alpha: float, beta: float,
               points: int = 16, jobs: int = 1) -> ScanTable:
    """
    Gamma(g)/Gamma(0) along the closed loop phi = phi^A for a wave packet moving
    with k_z. The mass and k_z are set from alpha = 1/(muB M^2 L) and
    beta = k_z/(muB M L). Rates below MIN_RATE are evaluated at MIN_RATE.
    """
    if len(g_grid) == 0:
        raise ConfigError("gamma_scan needs a nonempty g grid")
    base, k_z = parameters_from_conditions(model, alpha, beta)
    k_center = (k_z, -k_z)

    def run(g: float):
        return gamma_measure(validity_bundle(base.with_g(max(g, MIN_RATE)), points), k_center)

    reference = run(0.0)
    gamma0 = reference.gamma
    reports = _map_cells(run, [float(g) for g in g_grid], jobs)
    rows = []
    for g, report in zip(g_grid, reports):
        report.normalize(gamma0)
        rows.append((float(g), report.gamma, report.normalized, float(report.excluded)))
    logger.info(f"Gamma scan finished: Gamma(0)={gamma0:.6g}, k_z={k_z:.6g}, M={base.M:.6g}")
    table = ScanTable.from_rows(["g", "Gamma", "Gamma_norm", "excluded"], rows,
                                {"g": "1", "Gamma": "1", "Gamma_norm": "1", "excluded": "count"})
    table.provenance.update({"mass": base.M, "k_z": k_z, "min_rate": MIN_RATE,
                             "closed_system_conditions": closed_system_conditions(base, k_z)})
    return table


def _random_density(n: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = G @ G.conj().T
    return rho / np.trace(rho)


def disscom_structure_defects(rates: DissCOMRates, n_max: int, rng: np.random.Generator) -> Tuple[float, float]:
    """
    Largest interior deviation of the C/D form and of the vectorized L_C from
    the direct generator on one random state; the C/D defect is NaN for gamma1 = 0.
    """
    basis = xp_matrices(n_max)
    rho = _random_density(n_max, rng)
    direct = disscom_rhs(rho, rates, basis)
    inner = basis.interior
    via_lc = devectorize(-1j * (build_LC(basis, rates) @ vectorize(rho)))
    lc_defect = float(np.max(np.abs(direct - via_lc)[inner, inner]))
    if rates.gamma1 <= 0:
        return float("nan"), lc_defect
    C, D = build_CD(rates, basis)
    cd_defect = float(np.max(np.abs(direct - cd_rhs(rho, C, D))[inner, inner]))
    return cd_defect, lc_defect


def disscom_check(model: HelicalModel, rates_list: Sequence[DissCOMRates], alpha: float, beta: float,
                  n_max: int = 8, points: int = 16, seed: int = 0) -> ScanTable:
    """
    Structure defects, and Gamma with the L_C term against Gamma without it,
    for the closed spin in the chi_m kron chi_n^A levels with the slow motion
    on an n_max ladder. The mass comes from alpha; beta is not used.
    """
    rng = np.random.default_rng(seed)
    base, _ = parameters_from_conditions(model, alpha, beta)
    bundle = pair_bundle(base, points)
    basis = xp_matrices(n_max)
    plain = oscillator_validity(bundle, basis)
    rows = []
    for rates in rates_list:
        cd_defect, lc_defect = disscom_structure_defects(rates, n_max, rng)
        report = disscom_validity(bundle, rates, basis, gamma0=plain.gamma)
        rows.append((rates.gamma1, rates.gamma2, cd_defect, lc_defect, report.gamma, plain.gamma))
    units = {"gamma1": "1/(time length^2)", "gamma2": "1/time", "cd_defect": "1", "lc_defect": "1",
             "Gamma": "1", "Gamma_plain": "1"}
    table = ScanTable.from_rows(list(units), rows, units)
    table.provenance.update({"n_max": n_max, "seed": seed, "mass": base.M})
    return table
