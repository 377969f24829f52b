from .model import PreimageTree, Classification, PeriodicOrbit, OmegaSet, FixedPointSet, PreconditionReport, \
    JuliaSample, BoxDimension
from .rational import RationalMap, RationalMapError, RootSolverError, DegenerateFiberError, BudgetExceededError, \
    INFINITY, is_infinity
from .periodic import PeriodicError, NotParabolicError, fixed_points_of_iterate, find_periodic_points, classify, \
    omega, check_parabolic_preconditions, a_omega, reduce_to_fixed
from .julia import JuliaError, sample_inverse_iteration, sample_escape_boundary, box_counting_dimension, ball_mask
from .cache import SqliteOrbitCache

__all__ = [
    'PreimageTree',
    'Classification',
    'PeriodicOrbit',
    'OmegaSet',
    'FixedPointSet',
    'PreconditionReport',
    'JuliaSample',
    'BoxDimension',
    'RationalMap',
    'RationalMapError',
    'RootSolverError',
    'DegenerateFiberError',
    'BudgetExceededError',
    'INFINITY',
    'is_infinity',
    'PeriodicError',
    'NotParabolicError',
    'fixed_points_of_iterate',
    'find_periodic_points',
    'classify',
    'omega',
    'check_parabolic_preconditions',
    'a_omega',
    'reduce_to_fixed',
    'JuliaError',
    'sample_inverse_iteration',
    'sample_escape_boundary',
    'box_counting_dimension',
    'ball_mask',
    'SqliteOrbitCache',
]
