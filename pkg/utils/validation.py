import copy
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import yaml

from exceptions import ConfigError

logger = logging.getLogger(__name__)


def load_yaml(path: Path) -> Tuple[Dict[str, Any], str]:
    """Read a YAML mapping; returns (document, raw text)"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file does not exist: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        column = f", column {mark.column + 1}" if mark is not None else ""
        raise ConfigError(
            "Malformed YAML",
            f"{getattr(e, 'problem', e)}{column}",
            line=line,
        ) from e
    if not isinstance(document, dict):
        raise ConfigError("Config document must be a mapping", f"got {type(document).__name__}")
    return document, text


def yaml_line(text: str, path: Sequence[Any]) -> Optional[int]:
    """1-based line of the node at a dotted field path, or of its deepest existing parent"""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = None
    for key in path:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == str(key)), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            match = node.value[key]
        else:
            match = None
        if match is None:
            break
        node = match
        line = node.start_mark.line + 1
    return line


def schema_error(error, text: str) -> ConfigError:
    """ConfigError from the first entry of a pydantic ValidationError"""
    first = error.errors()[0]
    loc = [p for p in first["loc"] if not (isinstance(p, str) and p.startswith("function-"))]
    field = ".".join(str(p) for p in loc)
    extra = len(error.errors()) - 1
    details = first["msg"] + (f" (+{extra} more)" if extra else "")
    return ConfigError("Invalid config", details, field=field or None, line=yaml_line(text, loc))


def apply_overrides(
    document: Dict[str, Any],
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
    samples: Optional[int] = None,
) -> Dict[str, Any]:
    """Copy of the document with CLI overrides applied"""
    doc = copy.deepcopy(document)
    if seed is not None:
        doc.setdefault("analysis", {})["seed"] = int(seed)
    if out_dir is not None:
        doc.setdefault("output", {})["dir"] = str(out_dir)
    if samples is not None:
        if samples <= 0:
            raise ConfigError("--samples must be positive", f"samples={samples}", field="sampler.n_samples")
        doc.setdefault("sampler", {})["n_samples"] = int(samples)
    return doc


def validate_probability(value: float, name: str, open_upper: bool = False) -> float:
    """value in (0, 1], or (0, 1) when open_upper"""
    upper_ok = value < 1.0 if open_upper else value <= 1.0
    if not (np.isfinite(value) and value > 0.0 and upper_ok):
        bound = "(0, 1)" if open_upper else "(0, 1]"
        raise ConfigError(f"{name} must lie in {bound}", f"{name}={value}", field=name)
    return float(value)


def validate_beta_grid(start: float, stop: float, points: int, beta_max: float) -> np.ndarray:
    """Evenly spaced β grid inside (0, beta_max]"""
    if points < 2:
        raise ConfigError("beta grid needs at least two points", f"points={points}", field="inference.beta_grid")
    if not 0.0 < start < stop <= beta_max:
        raise ConfigError(
            "beta grid must satisfy 0 < start < stop <= beta_max",
            f"start={start}, stop={stop}, beta_max={beta_max}",
            field="inference.beta_grid",
        )
    return np.linspace(start, stop, points)
