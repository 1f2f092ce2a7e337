"""
Dense complex linear algebra: left/right eigenpairs, cubic roots, RK4 propagation
"""

from .complex_linalg import (
    DEGENERACY_THRESHOLD,
    EigenPair,
    Spectrum,
    biorthonormalize,
    cubic_residual,
    eig_general,
    propagate,
    propagate_constant,
    relax,
    solve_cubic,
    spectral_gap,
)

__all__ = [
    'DEGENERACY_THRESHOLD', 'EigenPair', 'Spectrum', 'biorthonormalize', 'cubic_residual',
    'eig_general', 'propagate', 'propagate_constant', 'relax', 'solve_cubic', 'spectral_gap',
]
