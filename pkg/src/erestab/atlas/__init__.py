"""Scanning engine, output writers and the command-line interface."""

from .engine import (
    CurveSample,
    MassRecord,
    ScanConfig,
    ScanRecord,
    SymmetricRow,
    evaluate_point,
    find_symmetric_threshold,
    scan_alpha_e,
    scan_mass_plane,
    symmetric_sweep,
    trace_curve_e,
    trace_curves,
)

__all__ = [
    "CurveSample",
    "MassRecord",
    "ScanConfig",
    "ScanRecord",
    "SymmetricRow",
    "evaluate_point",
    "find_symmetric_threshold",
    "scan_alpha_e",
    "scan_mass_plane",
    "symmetric_sweep",
    "trace_curve_e",
    "trace_curves",
]
