"""Result files: CSV tables, JSON reports and SVG plots.

Every file starts with the tool version and the config hash so a result can
be traced to the exact experiment that produced it. Output is bit-exact for
a given config and seed: floats are written with ``repr`` (shortest
round-trip form), infinities as ``+inf``/``-inf``, lines end with LF.
"""

import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from pydantic import BaseModel

from .. import __version__
from ..config import config

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    value = float(value)
    if math.isinf(value):
        return "+inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return repr(value)


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _jsonable(value: Any) -> Any:
    """Python-mode dump with non-finite floats spelled as strings."""
    if isinstance(value, BaseModel):
        return _jsonable(value.model_dump(mode="python"))
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return format_float(value)
    return value


class ResultWriter:
    """Writes the result files of one experiment run into a directory.

    Example:
        writer = ResultWriter(Path("results/exp-bm"), config_hash)
        writer.write_csv("bound.csv", ["t", "bound"], [(1.0, 2.5), (2.0, 1.8)])
        writer.write_json("report.json", report)
    """

    def __init__(self, out_dir: Optional[Path] = None, config_hash: str = ""):
        """Initialize the writer.

        Args:
            out_dir: Target directory, created if needed.
                     Defaults to ``config.output_dir``
            config_hash: sha256 hex digest of the experiment config
        """
        self.out_dir = Path(out_dir) if out_dir else Path(config.output_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config_hash = config_hash
        self.written: list[Path] = []

    def header_lines(self) -> list[str]:
        return [f"ergoline {__version__}", f"config-sha256 {self.config_hash}"]

    def _write(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        self.written.append(path)
        logger.info(f"Wrote {path}")
        return path

    def write_csv(
        self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> Path:
        lines = [f"# {line}" for line in self.header_lines()]
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(format_cell(cell) for cell in row))
        return self._write(name, "\n".join(lines) + "\n")

    def write_json(self, name: str, payload: Any) -> Path:
        document = {
            "ergoline": __version__,
            "config_sha256": self.config_hash,
            "result": _jsonable(payload),
        }
        return self._write(name, json.dumps(document, indent=2) + "\n")

    def write_svg(self, name: str, svg: str) -> Path:
        comments = "".join(f"<!-- {line} -->\n" for line in self.header_lines())
        return self._write(name, comments + svg)
