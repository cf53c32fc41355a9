"""Surfaces with positive relative nullity in Robertson-Walker space-times L^4_1(f, c).

Submodules: ``space_forms`` (fiber models), ``ambient`` (warped metric and
connection), ``surface`` (jets, adapted frames, second fundamental form),
``ode`` (frame ODEs and warp integrals), ``families`` (explicit constructions)
and ``verify`` (numeric checkers).
"""
from .ambient import DomainError, WarpingFunction, ambient_curvature, ambient_metric, constant_curvature_defect
from .families import FamilySpec, SpecError, construct, predicted_invariants, validate_spec
from .ode import CoefficientFunction, FrameODESystem, integrate_frame, warp_integral
from .surface import Immersion, SurfaceGeometry, adapted_frame, relative_nullity_dim, second_fundamental_form
from .verify import VerificationReport, make_grid, verify_family

__all__ = [
    "CoefficientFunction",
    "DomainError",
    "FamilySpec",
    "FrameODESystem",
    "Immersion",
    "SpecError",
    "SurfaceGeometry",
    "VerificationReport",
    "WarpingFunction",
    "adapted_frame",
    "ambient_curvature",
    "ambient_metric",
    "constant_curvature_defect",
    "construct",
    "integrate_frame",
    "make_grid",
    "predicted_invariants",
    "relative_nullity_dim",
    "second_fundamental_form",
    "validate_spec",
    "verify_family",
    "warp_integral",
]
