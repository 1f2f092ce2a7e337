"""
Runtime settings read from the environment (.env supported)
"""

from .settings import LOG_LEVEL, JOBS, STORE_PATH, STEPS_PER_UNIT

__all__ = ['LOG_LEVEL', 'JOBS', 'STORE_PATH', 'STEPS_PER_UNIT']
