from typing import Awaitable, Callable, Dict

from . import density, fiducial_rr, gibbs, importance, pdo_curves
from .context import RunContext

Handler = Callable[[RunContext], Awaitable[None]]


def setup_handlers() -> Dict[str, Handler]:
    """Analysis kind -> handler coroutine"""
    return {
        "density": density.handle,
        "importance": importance.handle,
        "pdo_curves": pdo_curves.handle,
        "gibbs": gibbs.handle,
        "fiducial_rr": fiducial_rr.handle,
    }


__all__ = ["Handler", "RunContext", "setup_handlers"]
