"""Space-form and conformal-factor kernel in one namespace.

The implementation is split between :mod:`gapforge.geometry` (space forms,
trig-K functions, geodesic frames) and :mod:`gapforge.conformal` (conformal
factors and the curvature quantities derived from them).  This module
gathers the public names.
"""
from .conformal import (ConformalFactor, conformal_hessian, metric_hessian_eigs, scalar_curvature,
                        schrodinger_data, schrodinger_V_from_curvature)
from .geometry import (FrameAlongGeodesic, SpaceForm, cs_K, geodesic_frame, hyperbolic_distance, sn_K,
                       tn_K, trig_K)

ConformalFactorSpec = ConformalFactor

__all__ = ["ConformalFactor", "ConformalFactorSpec", "FrameAlongGeodesic", "SpaceForm", "conformal_hessian",
           "cs_K", "geodesic_frame", "hyperbolic_distance", "metric_hessian_eigs", "scalar_curvature",
           "schrodinger_V_from_curvature", "schrodinger_data", "sn_K", "tn_K", "trig_K"]
