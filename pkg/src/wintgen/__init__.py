"""Numerical DDVV, Wintgen-ideality and Moebius-frame analysis of parametric immersions."""

__version__ = "0.1.0"

from .config import RunConfig, load_config, parse_config
from .constructions import BaseSurface, MoebiusTransform, apply_transform, build, catalog, cone, cylinder, rotational
from .ddvv import (
    CanonicalForm,
    DdvvReport,
    ScanSummary,
    canonical_form,
    commutator_sides,
    curvature_ellipse,
    ddvv_deficit,
    ddvv_report,
    wintgen_scan,
)
from .errors import WintgenError
from .expr import parse, to_text
from .geometry import PointGeometry, point_geometry, scalar_curvatures
from .immersion import ImmersionSpec
from .jets import Jet, eval_jet
from .moebius import (
    canonical_moebius_form_check,
    distribution_integrability,
    integrability_residuals,
    local_data,
    moebius_frame,
    moebius_lift,
)

__all__ = [
    "BaseSurface",
    "CanonicalForm",
    "DdvvReport",
    "ImmersionSpec",
    "Jet",
    "MoebiusTransform",
    "PointGeometry",
    "RunConfig",
    "ScanSummary",
    "WintgenError",
    "apply_transform",
    "build",
    "canonical_form",
    "canonical_moebius_form_check",
    "catalog",
    "commutator_sides",
    "cone",
    "curvature_ellipse",
    "cylinder",
    "ddvv_deficit",
    "ddvv_report",
    "distribution_integrability",
    "eval_jet",
    "integrability_residuals",
    "load_config",
    "local_data",
    "moebius_frame",
    "moebius_lift",
    "parse",
    "parse_config",
    "point_geometry",
    "rotational",
    "scalar_curvatures",
    "to_text",
    "wintgen_scan",
]
