"""Rational inner functions on the polydisk: construction, singular sets,
derivative integrability, Newton polygons, level sets and boundary values."""

__version__ = "0.1.0"

from .boundary import BoundaryReport, boundary_value
from .catalog import catalog, catalog_names
from .fitting import IntegrabilityReport, fit_decay, integrability
from .gaussian import GaussianRational
from .l1 import l1_norm
from .levelsets import (LevelSetSample, level_set_sample, level_set_singularities, psi_lambda,
                        q_lambda, verify_cl_equals_ll)
from .newton import greenblatt_classify, q_form_tests, rho_series
from .poly import MultiPoly, parse_poly, partial_derivative, reflect, univariate_slice
from .realize import aty_realize
from .rif import RIFModel, delta, make_rif, slice_roots
from .sampling import DeltaProfile, omega_measure, sample_delta
from .scan import SingularScan, singular_scan

__all__ = [
    "BoundaryReport", "DeltaProfile", "GaussianRational", "IntegrabilityReport",
    "LevelSetSample", "MultiPoly", "RIFModel", "SingularScan", "aty_realize",
    "boundary_value", "catalog", "catalog_names", "delta", "fit_decay", "greenblatt_classify",
    "integrability", "l1_norm", "level_set_sample", "level_set_singularities", "make_rif",
    "omega_measure", "parse_poly", "partial_derivative", "psi_lambda", "q_form_tests",
    "q_lambda", "reflect", "rho_series", "sample_delta", "singular_scan", "slice_roots",
    "univariate_slice", "verify_cl_equals_ll",
]
