"""
DissCOM: quadratic (non-Lindblad) dissipation of the center-of-mass motion
"""

from .disscom import (
    DissCOMRates,
    FactorizedPieces,
    MotionBasis,
    build_CD,
    build_LC,
    cd_rhs,
    disscom_rhs,
    disscom_validity,
    factorized_pieces,
    lc_level_couplings,
    lc_matrix_elements,
    level_hamiltonians,
    level_O,
    oscillator_validity,
    pair_states,
    slow_ladder,
    xp_matrices,
)

__all__ = [
    'DissCOMRates', 'FactorizedPieces', 'MotionBasis', 'build_CD', 'build_LC', 'cd_rhs', 'disscom_rhs',
    'disscom_validity', 'factorized_pieces', 'lc_level_couplings', 'lc_matrix_elements', 'level_hamiltonians',
    'level_O', 'oscillator_validity', 'pair_states', 'slow_ladder', 'xp_matrices',
]
