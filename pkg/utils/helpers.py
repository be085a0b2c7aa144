import hashlib
import json
import logging
import re
import time
from pathlib import Path
from typing import Any, Optional

logger = logging.getLogger(__name__)


def safe_filename(filename: str, max_length: int = 100) -> str:
    """Create safe filename by removing/replacing problematic characters"""
    safe_name = re.sub(r'[<>:"/\\|?*]', "_", filename)
    safe_name = re.sub(r"\s+", "_", safe_name)
    safe_name = safe_name.strip("._")

    if len(safe_name) > max_length:
        name_part, ext = Path(safe_name).stem, Path(safe_name).suffix
        safe_name = name_part[: max_length - len(ext)] + ext

    return safe_name or "unnamed_output"


def alpha_tag(alpha: float) -> str:
    """0.05 -> 'a0p05', used in per-alpha output names"""
    return "a" + f"{alpha:g}".replace(".", "p").replace("-", "m")


def config_digest(document: Any) -> str:
    """SHA-256 of a canonical JSON rendering of a config document"""
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def format_duration(seconds: float) -> str:
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, secs = divmod(int(seconds), 60)
    if minutes < 60:
        return f"{minutes}m{secs:02d}s"
    hours, minutes = divmod(minutes, 60)
    return f"{hours}h{minutes:02d}m"


class ProgressTracker:
    """
    Track and report progress of long sampler runs.

    A line is logged at INFO each time progress crosses another
    `report_every` fraction of `total_steps`, with an ETA extrapolated from
    the mean step time so far. Passing a message to `update` forces a line.

    Args:
        total_steps: Steps expected over the whole run (clamped to at least 1)
        label: Prefix of every progress line, usually the chain label
        report_every: Fraction of the total between two progress lines
    """

    def __init__(self, total_steps: int, label: str = "", report_every: float = 0.1):
        self.total_steps = max(int(total_steps), 1)
        self.label = label
        self.report_every = report_every
        self.current_step = 0
        self.start_time = time.monotonic()
        self._next_report = report_every

    @property
    def progress(self) -> float:
        return min(self.current_step / self.total_steps, 1.0)

    def update(self, step_increment: int = 1, message: Optional[str] = None):
        self.current_step += step_increment
        progress = self.progress

        if message or progress >= self._next_report:
            eta = self.get_eta()
            eta_text = f", ETA {format_duration(eta)}" if eta is not None and progress < 1.0 else ""
            logger.info(f"{self.label} progress: {progress:.0%}{eta_text}" + (f" - {message}" if message else ""))
            while self._next_report <= progress:
                self._next_report += self.report_every

    def get_eta(self) -> Optional[float]:
        if self.current_step == 0:
            return None
        elapsed = time.monotonic() - self.start_time
        remaining_steps = self.total_steps - self.current_step
        return max(remaining_steps * elapsed / self.current_step, 0.0)
