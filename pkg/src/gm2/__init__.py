"""Numerics for the planar Gaussian Minkowski problem."""

from .errors import GM2Error
from .gauss_geom import ConvexPolygon, SupportSamples
from .minkowski_solve import PrescribedData, SolverConfig, SolveResult, solve_branch, validate_f
from .phase_plane import half_period_shoot, integrate, search_periodic
from .scalar_core import (GoodPair, c_from_pair, constant_solutions, critical_radii,
                          good_pair_from_h0, h0_domain)
from .theta import QuadratureConfig, ThetaResult, scan_min_theta, theta_eval, theta_small_r_limit

__version__ = "0.1.0"
