import asyncio
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, TypeVar

from config import EngineConfig
from exceptions import ConfigError, ValidationError
from models.analysis_config import AnalysisConfig
from utils.file_manager import OutputWriter

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass
class RunContext:
    """Everything a handler needs for one analysis run"""

    config: AnalysisConfig
    engine: EngineConfig
    writer: OutputWriter
    summary: Dict[str, Any] = field(default_factory=dict)
    seeds: List[Dict[str, int]] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    semaphore: asyncio.Semaphore = None

    def __post_init__(self):
        if self.semaphore is None:
            self.semaphore = asyncio.Semaphore(self.engine.max_workers)

    @property
    def name(self) -> str:
        return self.config.analysis.name

    @property
    def seed(self) -> int:
        return self.config.analysis.seed

    def build_model(self):
        try:
            return self.config.model.build()
        except ValidationError as e:
            raise ConfigError("Invalid model block", str(e), field="model") from e

    async def offload(self, fn: Callable[..., T], *args, **kwargs) -> T:
        """Run blocking engine work in a worker thread, bounded by max_workers"""
        async with self.semaphore:
            return await asyncio.to_thread(fn, *args, **kwargs)

    def warn(self, message: str):
        logger.warning(message)
        self.warnings.append(message)
