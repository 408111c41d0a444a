"""Numerical criterion checkers for inner functions.

Everything here is empirical by design: the properties being probed
quantify over all points of the disc, so each checker reports values on
stratified sample grids together with refinement traces, and marks an
entry "certified" only when a cell cover proves it.
"""

from .grids import SampleGrid, depth_for_zeros
from .criteria import (
    CnFit,
    DecompositionError,
    DecompositionResult,
    WepEntry,
    WepProfile,
    carleson_delta,
    cn_exponent_fit,
    split_into_interpolating,
    vasyunin_constant,
    wep_profile,
)
from .roots import LevelSolveError, level_solve, rational_coeffs
from .cover import (
    AreaTrend,
    RegionCover,
    Sector,
    disk_cover,
    halfplane_superlevel_area,
    level_set_cover,
    sublevel_area_report,
    weighted_area,
)

__all__ = [
    "SampleGrid",
    "depth_for_zeros",
    "WepEntry",
    "WepProfile",
    "wep_profile",
    "vasyunin_constant",
    "CnFit",
    "cn_exponent_fit",
    "carleson_delta",
    "DecompositionError",
    "DecompositionResult",
    "split_into_interpolating",
    "LevelSolveError",
    "level_solve",
    "rational_coeffs",
    "RegionCover",
    "Sector",
    "AreaTrend",
    "level_set_cover",
    "disk_cover",
    "weighted_area",
    "sublevel_area_report",
    "halfplane_superlevel_area",
]
