"""Curvature of connections attached to systems of second-order PDEs on jet space."""

from .symcore import diff, evaluate, is_zero, parse, simplify
from .connection import Connection, Slice, adapted_slice, build_split_frame, make_slice
from .curvature import curvature_report, jacobi_curvature, r_gamma, r_h
from .secondorder import check_compatibility, metric_reduction
from .applications import harmonic_connection, harmonic_curvature_check, lemniscate, metric, separability_check
from .specfile import load, loads

__version__ = "0.1.0"

__all__ = [
    "diff", "evaluate", "is_zero", "parse", "simplify",
    "Connection", "Slice", "adapted_slice", "build_split_frame", "make_slice",
    "curvature_report", "jacobi_curvature", "r_gamma", "r_h",
    "check_compatibility", "metric_reduction",
    "harmonic_connection", "harmonic_curvature_check", "lemniscate", "metric", "separability_check",
    "load", "loads",
]
