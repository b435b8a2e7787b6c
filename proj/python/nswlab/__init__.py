"""Weighted-space diagnostics for Navier-Stokes fields."""

import json as _json

from ._core import (
    GridField,
    NswError,
    build_cover,
    cli,
    cn_norm,
    cylinder_quantity,
    divergence_max,
    eventual_region,
    existence_time,
    generate,
    global_pressure,
    gronwall_time,
    herz_norm,
    largest_cover_level,
    leray_project,
    load_nswf,
    log_ratio_factor,
    m_norm,
    pressure_expansion_residual,
    save_nswf,
    sigma_sq,
    solve,
    verify_cover,
)
from ._core import equivalence_report as _equivalence_report


def equivalence_report(field, n_max):
    """Norm-equivalence report as a dict."""
    return _json.loads(_equivalence_report(field, n_max))


__all__ = [
    "GridField",
    "NswError",
    "build_cover",
    "cli",
    "cn_norm",
    "cylinder_quantity",
    "divergence_max",
    "equivalence_report",
    "eventual_region",
    "existence_time",
    "generate",
    "global_pressure",
    "gronwall_time",
    "herz_norm",
    "largest_cover_level",
    "leray_project",
    "load_nswf",
    "log_ratio_factor",
    "m_norm",
    "pressure_expansion_residual",
    "save_nswf",
    "sigma_sq",
    "solve",
    "verify_cover",
]
