"""gapforge: fundamental-gap bounds on conformally flat and space-form domains.

Submodules
----------
geomkernel   space forms, trig-K functions, geodesic frames, conformal factors
domains      convex domains in the Euclidean, Poincare-disk and stereographic charts
model1d      the one-dimensional weighted comparison problem
moduli       gap-bound pipelines and closed-form evaluators
eigsolve     2D weighted Dirichlet eigensolver and audits
twopoint     two-point functions and the second-variation identity
diffusion    mirror-coupled diffusions and their audits
cli          the ``gapforge`` command
"""
from .conformal import ConformalFactor
from .domains import Domain, diameters, horoconvexity_check
from .eigsolve import appendix_collapse, hyperbolic_ball_gap, log_concavity_audit, solve_weighted_2d
from .errors import (ChartError, ConfigError, ConvergenceError, GapforgeError, GeometryError,
                     PreconditionError)
from .geometry import SpaceForm, geodesic_frame, trig_K
from .model1d import Modulus1D, closed_form_gap_bound, shoot_1d, solve_1d
from .moduli import (GapBoundReport, asymptotic_horoconvex_bound, conformally_flat_bound,
                     explicit_horoconvex_bound, horoconvex_gap_bound, s1xsn_modulus,
                     sphere_deformation_bound)

__version__ = "0.1.0"

__all__ = [
    "ChartError", "ConfigError", "ConformalFactor", "ConvergenceError", "Domain", "GapBoundReport",
    "GapforgeError", "GeometryError", "Modulus1D", "PreconditionError", "SpaceForm", "appendix_collapse",
    "asymptotic_horoconvex_bound", "closed_form_gap_bound", "conformally_flat_bound", "diameters",
    "explicit_horoconvex_bound", "geodesic_frame", "horoconvex_gap_bound", "horoconvexity_check",
    "hyperbolic_ball_gap", "log_concavity_audit", "s1xsn_modulus", "shoot_1d", "solve_1d",
    "solve_weighted_2d", "sphere_deformation_bound", "trig_K",
]
