"""Metric geometry on Heisenberg and step-2 H-type Carnot groups.

Homogeneous distances (layered max-norm, gauge, Carnot-Caratheodory),
geodesic sphere parameterizations, Haar/spherical measure estimation, and
the ball-plus-bump constructions showing closed balls are not isodiametric.
"""

from .groups import (GroupError, GroupPoint, GroupSpec, LayeredVector,
                     dilate, h1_point_from_htype, h1_point_to_htype, h_type,
                     heis_inv, heis_mul, heisenberg, htype_mul, identity,
                     point, validate_htype)
from .metrics import (CCInversionConfig, CCMetric, ConvergenceError,
                      DinfMetric, GaugeMetric, MetricError, make_metric,
                      validate_dinf_coefficients)
from .geodesics import (CutPointReport, GeodesicParams, cc_geodesic_sample,
                        cc_sphere_point, cut_point, verify_assumption_C)
from .measures import (BoundingBox, EstimateWithError, QuadratureConfig,
                       QuadratureError, SampledSet, alpha, ball_set,
                       cc_unit_ball_volume, dinf_unit_ball_volume,
                       gauge_unit_ball_volume, mc_measure, set_diameter,
                       spherical_measure)
from .isodiametric import (ApexReachReport, BumpParams, CertificateError,
                           RatioResult, SigmaBounds, apex_reach, bump_ratio,
                           cdc_upper_bound, cdinf_upper_bound,
                           isodiametric_ratio, maximize_bump, sigma_bounds,
                           sigma_bounds_for)

__version__ = "0.1.0"
