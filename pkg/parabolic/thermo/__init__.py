from .potential import Potential, GeometricPotential, ConstantPotential, CombinationPotential, TablePotential, \
    IteratePotential, PotentialError, NearCriticalError, HolderData, parse_potential, birkhoff_sum
from .metric import MilnorMetric, MetricError, postcritical_truncation, verify_expansion, calibrate
from .decomposition import OrbitSegment, DecompositionParams, decompose, split_pattern_exhaustive, in_D_alpha
from .spec_verify import SpecificationError, GluingError, estimate_transition_time, glue, verify_shadowing, \
    contraction_profile, bowen_variation
from .pressure import PressureError, OracleConfig, PressureEstimate, estimate_pressure, pressure_tree, \
    pressure_periodic, pressure_ulam, pressure_separated, bowen_root

__all__ = [
    'Potential',
    'GeometricPotential',
    'ConstantPotential',
    'CombinationPotential',
    'TablePotential',
    'IteratePotential',
    'PotentialError',
    'NearCriticalError',
    'HolderData',
    'parse_potential',
    'birkhoff_sum',
    'MilnorMetric',
    'MetricError',
    'postcritical_truncation',
    'verify_expansion',
    'calibrate',
    'OrbitSegment',
    'DecompositionParams',
    'decompose',
    'split_pattern_exhaustive',
    'in_D_alpha',
    'SpecificationError',
    'GluingError',
    'estimate_transition_time',
    'glue',
    'verify_shadowing',
    'contraction_profile',
    'bowen_variation',
    'PressureError',
    'OracleConfig',
    'PressureEstimate',
    'estimate_pressure',
    'pressure_tree',
    'pressure_periodic',
    'pressure_ulam',
    'pressure_separated',
    'bowen_root',
]
