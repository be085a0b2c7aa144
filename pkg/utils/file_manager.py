import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence

import aiofiles
import aiofiles.os
import numpy as np

from .helpers import safe_filename
from .numeric import GridDensity

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def _csv_text(header: Sequence[str], columns: Sequence[np.ndarray], comments: Sequence[str] = ()) -> str:
    buffer = io.StringIO()
    for line in comments:
        buffer.write(f"# {line}\n")
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns]) if columns else np.empty((0, 0))
    np.savetxt(buffer, data, delimiter=",", header=",".join(header), comments="", fmt=FLOAT_FORMAT)
    return buffer.getvalue()


class OutputWriter:
    """
    Writes analysis outputs under one directory. Each file has a single
    owner within a run.
    """

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.written: List[Path] = []

    async def prepare(self):
        await aiofiles.os.makedirs(self.out_dir, exist_ok=True)

    def path_for(self, name: str) -> Path:
        return self.out_dir / safe_filename(name)

    async def write_text(self, name: str, text: str) -> Path:
        path = self.path_for(name)
        if path in self.written:
            raise FileExistsError(f"Output {path} already written in this run")
        self.written.append(path)
        async with aiofiles.open(path, "w", encoding="utf-8", newline="\n") as f:
            await f.write(text)
        logger.info(f"Wrote {path}")
        return path

    async def write_grid(self, name: str, grid: GridDensity, comments: Sequence[str] = ()) -> Path:
        """θ,density rows; atoms are declared in the header comments"""
        notes = list(comments) + [f"atom at {theta:.12g} with mass {mass:.12g}" for theta, mass in grid.atoms.items()]
        return await self.write_text(name, _csv_text(["theta", "density"], [grid.points, grid.values], notes))

    async def write_table(
        self,
        name: str,
        columns: Dict[str, np.ndarray],
        comments: Sequence[str] = (),
    ) -> Path:
        return await self.write_text(name, _csv_text(list(columns), list(columns.values()), comments))

    async def write_chain(self, name: str, samples: np.ndarray, names: Sequence[str], seed: Any, scan: str) -> Path:
        comments = [f"seed={seed}", f"scan={scan}"]
        return await self.write_text(name, _csv_text(list(names), list(np.asarray(samples).T), comments))

    async def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
        return await self.write_text(name, text)


def _json_default(value: Any):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Not JSON serialisable: {type(value).__name__}")

