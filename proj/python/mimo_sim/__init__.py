"""Massive MIMO spectral-efficiency simulator (Python front end to the C++ core)."""

from ._core import (
    NumericalError,
    example1_zf,
    exp_corr,
    independence_margin,
    list_presets,
    normalize_config,
    one_ring,
    pcp_deviation,
    preset_config,
    preset_names,
    run,
    two_user_delta,
    two_user_ul,
)

__all__ = [
    "NumericalError",
    "example1_zf",
    "exp_corr",
    "independence_margin",
    "list_presets",
    "normalize_config",
    "one_ring",
    "pcp_deviation",
    "preset_config",
    "preset_names",
    "run",
    "two_user_delta",
    "two_user_ul",
]
