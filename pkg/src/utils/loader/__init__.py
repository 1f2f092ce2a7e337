from .config_loader import load_run_config

__all__ = ['load_run_config']
