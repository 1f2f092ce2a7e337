from pathlib import Path
from typing import Dict, Union

from src.core.errors import ConfigError


def load_run_config(path: Union[str, Path]) -> Dict[str, str]:
    """Flat key=value file; '#' starts a comment, keys use the long flag names without dashes."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: Dict[str, str] = {}
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{number}: expected key=value, got {raw!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values
