"""
Open-system Born-Oppenheimer machinery: eigenbundles, A^T, F^T, O^T, validity
"""

from .bo_core import (
    MOMENTUM_WINDOW,
    SMALL_DENOMINATOR,
    Channel,
    EigenBundle,
    GeometricTerms,
    LoopAverages,
    OCoupling,
    SlowPoint,
    SlowVariableModel,
    ValidityReport,
    ZerothOrderHamiltonian,
    build_bundle,
    connection,
    coupling_O,
    covariant_terms,
    enumerate_channels,
    first_order_correction,
    first_order_energy,
    frame_at,
    gamma_measure,
    geometric_F,
    geometric_terms,
    loop_averages,
    loop_gauge,
    report_from_channels,
    spin_block,
    zeroth_hamiltonian,
)

__all__ = [
    'MOMENTUM_WINDOW', 'SMALL_DENOMINATOR', 'Channel', 'EigenBundle', 'GeometricTerms', 'LoopAverages',
    'OCoupling', 'SlowPoint', 'SlowVariableModel', 'ValidityReport', 'ZerothOrderHamiltonian', 'build_bundle',
    'connection', 'coupling_O', 'covariant_terms', 'enumerate_channels', 'first_order_correction', 'first_order_energy',
    'frame_at', 'gamma_measure', 'geometric_F', 'geometric_terms', 'loop_averages', 'loop_gauge',
    'report_from_channels', 'spin_block', 'zeroth_hamiltonian',
]
