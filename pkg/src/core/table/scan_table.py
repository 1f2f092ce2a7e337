import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import pandas as pd

ARTIFACT_VERSION = "0.1.0"
UNITS_PREFIX = "units:"

logger = logging.getLogger(__name__)


@dataclass
class ScanTable:
    """
    Rectangular table of real numbers with a unit for every column and a
    provenance header echoing the run parameters.
    """
    frame: pd.DataFrame
    units: Dict[str, str]
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        missing = [c for c in self.frame.columns if c not in self.units]
        if missing:
            raise ValueError(f"no unit recorded for columns {missing}")
        self.provenance.setdefault("version", ARTIFACT_VERSION)

    @classmethod
    def from_rows(cls, columns: Sequence[str], rows: Iterable[Sequence[float]], units: Dict[str, str],
                  provenance: Dict[str, Any] = None) -> "ScanTable":
        rows = [list(r) for r in rows]
        for r in rows:
            if len(r) != len(columns):
                raise ValueError(f"row of length {len(r)} in a table of {len(columns)} columns")
        frame = pd.DataFrame(rows, columns=list(columns), dtype=float)
        return cls(frame, dict(units), dict(provenance or {}))

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)

    def __len__(self) -> int:
        return len(self.frame)

    def column(self, name: str):
        return self.frame[name].to_numpy()

    def header_lines(self) -> List[str]:
        lines = [f"# {key} = {value}" for key, value in self.provenance.items()]
        lines.append(f"# {UNITS_PREFIX} " + "; ".join(f"{c}={self.units[c]}" for c in self.columns))
        return lines

    def to_text(self) -> str:
        body = self.frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
        return "\n".join(self.header_lines()) + "\n" + body

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(), encoding="utf-8")
        logger.info(f"Wrote {len(self)} rows to {path}")
        return path

    @classmethod
    def from_text(cls, text: str) -> "ScanTable":
        provenance: Dict[str, Any] = {}
        units: Dict[str, str] = {}
        body = []
        for line in text.splitlines():
            if not line.startswith("#"):
                body.append(line)
                continue
            content = line[1:].strip()
            if content.startswith(UNITS_PREFIX):
                for item in content[len(UNITS_PREFIX):].split(";"):
                    name, _, unit = item.strip().partition("=")
                    units[name] = unit
            else:
                key, _, value = content.partition(" = ")
                provenance[key] = value
        frame = pd.read_csv(io.StringIO("\n".join(body)), dtype=float, float_precision="round_trip")
        return cls(frame, units, provenance)

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "ScanTable":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))
