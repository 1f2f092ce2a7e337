"""
Master equations in Liouville space: vectorization, ancilla conjugation, H_T
"""

from .liouville import (
    DensityMatrix,
    EffectiveGenerator,
    LindbladSet,
    OpenSystemModel,
    QuadraticPair,
    ancilla_conjugate,
    build_LQ,
    build_LS,
    build_effective_generator,
    default_steps,
    devectorize,
    dissipator,
    evolve_direct,
    evolve_vectorized,
    generator_function,
    left_super,
    master_rhs,
    right_super,
    trace_vector,
    vectorize,
)

__all__ = [
    'DensityMatrix', 'EffectiveGenerator', 'LindbladSet', 'OpenSystemModel', 'QuadraticPair',
    'ancilla_conjugate', 'build_LQ', 'build_LS', 'build_effective_generator', 'default_steps', 'devectorize',
    'dissipator', 'evolve_direct', 'evolve_vectorized', 'generator_function', 'left_super',
    'master_rhs', 'right_super', 'trace_vector', 'vectorize',
]
