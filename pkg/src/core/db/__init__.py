from .scan_store import ScanStore

__all__ = ['ScanStore']
