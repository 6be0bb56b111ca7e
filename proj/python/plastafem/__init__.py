"""Adaptive finite elements for one quasi-static step of elastoplasticity."""

from ._plastafem import (
    TRACE_HEADER,
    ConfigError,
    PlastafemError,
    dorfler_mark,
    return_map,
    run,
    validate_config,
    verify,
)

__all__ = [
    "TRACE_HEADER",
    "ConfigError",
    "PlastafemError",
    "dorfler_mark",
    "return_map",
    "run",
    "validate_config",
    "verify",
]
