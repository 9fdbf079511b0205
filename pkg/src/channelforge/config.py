"""Runtime knobs read from the environment.

Values are looked up on every call so tests and subprocesses can change them
without reloading the package.
"""
import os

DEFAULT_DIM_CAP = 4096
DIM_CAP_ENV = "CHANNELFORGE_DIM_CAP"
NUMBA_ENV = "CHANNELFORGE_NUMBA"


def dim_cap() -> int:
    """Largest dense matrix side length any operation may build."""
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{DIM_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{DIM_CAP_ENV} must be positive, got {cap}")
    return cap


def numba_enabled() -> bool:
    """Whether compiled kernels are used. Set CHANNELFORGE_NUMBA=0 to force numpy."""
    return os.environ.get(NUMBA_ENV, "1").strip().lower() not in {"0", "false", "no", "off"}
