import logging
from collections.abc import Iterable

import numpy as np

ROOT_LOGGER = "mv_frontier"

logging.getLogger(ROOT_LOGGER).addHandler(logging.NullHandler())


def logger(module: str | None = None) -> logging.Logger:
    """App logger; `module` gives a child logger such as mv_frontier.oracle."""
    if module:
        return logging.getLogger(f"{ROOT_LOGGER}.{module}")
    return logging.getLogger(ROOT_LOGGER)


def set_log_level(level: str) -> None:
    """Send app logs to stderr at `level` (the CLI keeps stdout for results)."""
    log = logging.getLogger(ROOT_LOGGER)
    log.setLevel(level.upper())
    if not any(getattr(h, "_mv_frontier_stderr", False) for h in log.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._mv_frontier_stderr = True
        log.addHandler(handler)


def as_vector(values: Iterable[float] | np.ndarray) -> np.ndarray:
    """Read-only 1-D float64 copy."""
    vec = np.array(values, dtype=np.float64).reshape(-1)
    vec.setflags(write=False)
    return vec


def as_matrix(values) -> np.ndarray:
    """Read-only float64 copy; the shape is left for the caller to check."""
    mat = np.array(values, dtype=np.float64)
    mat.setflags(write=False)
    return mat
