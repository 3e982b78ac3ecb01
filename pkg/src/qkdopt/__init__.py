"""Secret key rates versus distance for QKD protocol families.

Rate engines, experiment profiles, parameter optimization and a photon-level
Monte Carlo cross-check.
"""

from .errors import DegenerateChannelError
from .infomath import CascadeCubic, Constant, Custom, ShannonLimit, binary_entropy, conditional_entropy
from .optimize import OptimizeDirective, maximize_scalar
from .profiles import ExperimentProfile, builtin_profiles, get_profile
from .rates import PROTOCOLS, RatePoint, cutoff_distance, distance_grid, sweep

__version__ = "0.1.0"

__all__ = [
    "CascadeCubic",
    "Constant",
    "Custom",
    "DegenerateChannelError",
    "ExperimentProfile",
    "OptimizeDirective",
    "PROTOCOLS",
    "RatePoint",
    "ShannonLimit",
    "binary_entropy",
    "builtin_profiles",
    "conditional_entropy",
    "cutoff_distance",
    "distance_grid",
    "get_profile",
    "maximize_scalar",
    "sweep",
]
