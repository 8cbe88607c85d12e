"""
Duffing-Van der Pol Survey - Modules Package
Export the main types and entry points for easy import
"""

__version__ = '1.0.0'
__author__ = 'Duffing-Van der Pol Survey Team'

from .parameters import Params
from .errors import SurveyError, DomainError, ConfigError
from .unperturbed_geometry import DomainTag, EnergyLevel, level_from_h, level_from_rho
from .autonomous_analysis import CycleCensus, LimitCycle, find_cycles, census_plane
from .resonance_analysis import ResonancePair, ResonanceZone, ZoneClass, resonance_zone, classify
from .melnikov_homoclinic import LoopSide, MelnikovResult, delta1, threshold_p3_star
from .flow_engine import StroboscopicMap, Variant, find_saddle, grow_manifold, splitting_profile
from .results import ResultStore
from .survey import RunConfig, SweepResult, build_config, run

__all__ = [
    'Params',
    'SurveyError',
    'DomainError',
    'ConfigError',
    'DomainTag',
    'EnergyLevel',
    'level_from_h',
    'level_from_rho',
    'CycleCensus',
    'LimitCycle',
    'find_cycles',
    'census_plane',
    'ResonancePair',
    'ResonanceZone',
    'ZoneClass',
    'resonance_zone',
    'classify',
    'LoopSide',
    'MelnikovResult',
    'delta1',
    'threshold_p3_star',
    'StroboscopicMap',
    'Variant',
    'find_saddle',
    'grow_manifold',
    'splitting_profile',
    'ResultStore',
    'RunConfig',
    'SweepResult',
    'build_config',
    'run',
]
