from .scan_table import ARTIFACT_VERSION, ScanTable

__all__ = ['ARTIFACT_VERSION', 'ScanTable']
