import argparse
import dataclasses
import logging
import math
import sys
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.core.config import JOBS, LOG_LEVEL
from src.core.db import ScanStore
from src.core.disscom import DissCOMRates
from src.core.errors import ConfigError, NumericFailure
from src.core.linalg import eig_general
from src.core.table import ScanTable
from src.utils.loader import load_run_config

from .helical_model import PICTURES, HelicalModel, hst_matrix, polarization, spectrum_analytic, steady_state
from .scans import disscom_check, gamma_scan, pz_surface, pz_vs_gT

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("spectrum", "steady", "pz-scan", "pz-gt", "gamma-scan", "disscom-check")

# (g_min, g_max, g_steps, T_min, T_max, T_steps); T_min None means T_max/T_steps
DEFAULT_GRIDS = {
    "spectrum": (0.0, 1.0, 11, None, None, None),
    "steady": (0.5, 0.5, 1, None, None, None),
    "pz-scan": (0.0, 0.5, 26, None, 3.0, 121),
    "pz-gt": (None, None, None, None, 10.0, 201),
    "gamma-scan": (0.0, 1.0, 51, None, None, None),
    "disscom-check": (None, None, None, None, None, None),
}
PZ_GT_DEFAULT_G = (0.5, 2.0, 10.0, 50.0)

OBSERVABLE = {
    "spectrum": "Im_E1",
    "steady": "P_z",
    "pz-scan": "P_z",
    "pz-gt": "P_z",
    "gamma-scan": "Gamma_norm",
    "disscom-check": "Gamma",
}


@dataclass
class RunConfig:
    subcommand: str
    theta: float = math.pi / 2
    period: float = 1.0
    mass: float = 1.0
    muB: float = 1.0
    g: Optional[float] = None
    g_min: Optional[float] = None
    g_max: Optional[float] = None
    g_steps: Optional[int] = None
    T_min: Optional[float] = None
    T_max: Optional[float] = None
    T_steps: Optional[int] = None
    steps: Optional[int] = None
    picture: str = "bo"
    alpha: float = 1e-6
    beta: float = 2e-4
    phi: float = 0.0
    phiA: float = 0.0
    points: int = 16
    n_max: int = 8
    gamma1: float = 1e-3
    gamma2: float = 1e-4
    out: Optional[str] = None
    jobs: int = JOBS
    store: Optional[str] = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        g_min, g_max, g_steps, T_min, T_max, T_steps = DEFAULT_GRIDS[self.subcommand]
        if self.g is not None:
            g_min = g_max = self.g
            g_steps = 1
        self.g_min = g_min if self.g_min is None else self.g_min
        self.g_max = g_max if self.g_max is None else self.g_max
        self.g_steps = g_steps if self.g_steps is None else self.g_steps
        self.T_max = T_max if self.T_max is None else self.T_max
        self.T_steps = T_steps if self.T_steps is None else self.T_steps
        if self.T_min is None and self.T_max is not None and self.T_steps:
            self.T_min = self.T_max / self.T_steps
        self._validate()

    def _validate(self):
        for name in ("period", "mass", "muB", "alpha", "beta"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.jobs < 1 or self.points < 2 or self.n_max < 3:
            raise ConfigError("jobs must be >= 1, points >= 2 and n_max >= 3")
        if self.steps is not None and self.steps < 100:
            raise ConfigError(f"steps must be at least 100, got {self.steps}")
        if self.picture not in PICTURES:
            raise ConfigError(f"picture must be one of {PICTURES}, got {self.picture!r}")
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ConfigError("DissCOM rates must be non-negative")
        self._check_grid("g", self.g_min, self.g_max, self.g_steps, lower=0.0)
        self._check_grid("T", self.T_min, self.T_max, self.T_steps, lower=None)
        if self.T_min is not None and not self.T_min > 0:
            raise ConfigError(f"T grid must be positive, got T_min={self.T_min}")

    @staticmethod
    def _check_grid(name: str, lo, hi, n, lower):
        if lo is None and hi is None and n is None:
            return
        if lo is None or hi is None or n is None:
            raise ConfigError(f"{name} grid needs min, max and steps")
        if n < 1:
            raise ConfigError(f"{name} grid is empty")
        if hi < lo or (n > 1 and hi == lo):
            raise ConfigError(f"{name} grid must be increasing, got [{lo}, {hi}] with {n} points")
        if lower is not None and lo < lower:
            raise ConfigError(f"{name} grid must start at or above {lower}")

    def g_grid(self) -> List[float]:
        if self.g_steps is None:
            return []
        return [float(v) for v in np.linspace(self.g_min, self.g_max, self.g_steps)]

    def T_grid(self) -> List[float]:
        if self.T_steps is None:
            return []
        return [float(v) for v in np.linspace(self.T_min, self.T_max, self.T_steps)]

    def model(self, g: float = 0.0) -> HelicalModel:
        return HelicalModel(B=self.muB, theta=self.theta, L=self.period, M=self.mass, mu=1.0, g=g)

    def echo(self) -> Dict[str, object]:
        return {k: v for k, v in dataclasses.asdict(self).items() if k not in ("out", "jobs", "store")}


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, value: str):
    kind = FIELD_TYPES[key]
    try:
        if kind in (int, Optional[int]):
            return int(value)
        if kind in (float, Optional[float]):
            return float(value)
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {value!r}") from e
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults and environment, then the --config file, then explicit flags."""
    values: Dict[str, object] = {}
    if args.config:
        for key, raw in load_run_config(args.config).items():
            if key not in FIELD_TYPES or key == "subcommand":
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    for key in FIELD_TYPES:
        flag = getattr(args, key, None)
        if flag is not None and key != "subcommand":
            values[key] = flag
    return RunConfig(subcommand=args.subcommand, **values)


def cmd_spectrum(config: RunConfig) -> ScanTable:
    rows = []
    for g in config.g_grid():
        if abs(config.theta - math.pi / 2) < 1e-15:
            E = spectrum_analytic(config.phi, config.phiA, g)
        else:
            E = eig_general(hst_matrix(config.phi, config.phiA, config.theta, g)).values
            E = E[np.lexsort((E.imag, E.real))]
        row = [config.phi, config.phiA, g]
        for value in E:
            row += [value.real, value.imag]
        rows.append(row)
    columns = ["phi", "phiA", "g"] + [f"{part}_E{j}" for j in range(1, 5) for part in ("Re", "Im")]
    units = {c: "muB" for c in columns}
    units.update({"phi": "rad", "phiA": "rad", "g": "1"})
    return ScanTable.from_rows(columns, rows, units)


def cmd_steady(config: RunConfig) -> ScanTable:
    rows = []
    for g in config.g_grid():
        rho = steady_state(g, theta=config.theta, phi=config.phi).matrix
        row = [g]
        for value in rho.ravel():
            row += [value.real, value.imag]
        rows.append(row + [polarization(rho), float(np.trace(rho).real)])
    columns = ["g"] + [f"{part}_rho_{ij}" for ij in ("uu", "ud", "du", "dd") for part in ("Re", "Im")]
    columns += ["P_z", "trace"]
    return ScanTable.from_rows(columns, rows, {c: "1" for c in columns})


def cmd_pz_scan(config: RunConfig) -> ScanTable:
    return pz_surface(config.model(), config.g_grid(), config.T_grid(), config.steps, config.jobs, config.picture)


def cmd_pz_gt(config: RunConfig) -> ScanTable:
    g_list = config.g_grid() or list(PZ_GT_DEFAULT_G)
    return pz_vs_gT(config.model(), g_list, config.T_grid(), config.steps, config.jobs, config.picture)


def cmd_gamma_scan(config: RunConfig) -> ScanTable:
    return gamma_scan(config.model(), config.g_grid(), config.alpha, config.beta, config.points, config.jobs)


def cmd_disscom_check(config: RunConfig) -> ScanTable:
    rates = [DissCOMRates(0.0, 0.0), DissCOMRates(config.gamma1, config.gamma2)]
    return disscom_check(config.model(), rates, config.alpha, config.beta, config.n_max, config.points)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "steady": cmd_steady,
    "pz-scan": cmd_pz_scan,
    "pz-gt": cmd_pz_gt,
    "gamma-scan": cmd_gamma_scan,
    "disscom-check": cmd_disscom_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Born-Oppenheimer approximation for a neutron in a helical field")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="flat key=value file, overridden by flags")
    parser.add_argument("--theta", type=float)
    parser.add_argument("--period", type=float, help="helix period L")
    parser.add_argument("--mass", type=float)
    parser.add_argument("--muB", type=float)
    parser.add_argument("--g", type=float)
    parser.add_argument("--g-min", dest="g_min", type=float)
    parser.add_argument("--g-max", dest="g_max", type=float)
    parser.add_argument("--g-steps", dest="g_steps", type=int)
    parser.add_argument("--T-min", dest="T_min", type=float, help="units of pi/muB (gT for pz-gt)")
    parser.add_argument("--T-max", dest="T_max", type=float)
    parser.add_argument("--T-steps", dest="T_steps", type=int)
    parser.add_argument("--steps", type=int, help="time steps per run")
    parser.add_argument("--picture", choices=PICTURES, help="bo: zeroth-order BO dynamics; lab: full transport")
    parser.add_argument("--alpha", type=float, help="1/(muB M^2 L)")
    parser.add_argument("--beta", type=float, help="k_z/(muB M L)")
    parser.add_argument("--phi", type=float)
    parser.add_argument("--phiA", type=float)
    parser.add_argument("--points", type=int, help="grid points on the validity loop")
    parser.add_argument("--n-max", dest="n_max", type=int)
    parser.add_argument("--gamma1", type=float)
    parser.add_argument("--gamma2", type=float)
    parser.add_argument("--out", help="CSV path (default data/results/<subcommand>.csv)")
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--store", help="also archive the table in this SQLite file")
    return parser


def run(config: RunConfig) -> ScanTable:
    start = time.perf_counter()
    table = COMMANDS[config.subcommand](config)
    table.provenance = {"subcommand": config.subcommand, **config.echo(), **table.provenance}
    out = config.out or f"data/results/{config.subcommand}.csv"
    table.to_csv(out)
    if config.store:
        with ScanStore(config.store) as store:
            store.save_table(table)
    observable = OBSERVABLE[config.subcommand]
    values = table.column(observable)
    print(f"{config.subcommand}: {len(table)} rows, {observable} in "
          f"[{np.nanmin(values):.6g}, {np.nanmax(values):.6g}], {time.perf_counter() - start:.2f}s -> {out}")
    return table


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
    )
    args = build_parser().parse_args(argv)
    try:
        run(build_config(args))
    except ConfigError as e:
        print(f"Config error: {e}")
        return 2
    except NumericFailure as e:
        logger.error(f"Numeric failure: {e}")
        print(f"Numeric failure: {e}")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
