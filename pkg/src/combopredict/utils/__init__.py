"""
Utility modules for combopredict
"""

from .path import fixture_path, resolve_config_path, resolve_data_path
from .rng import make_generator

__all__ = ['fixture_path', 'resolve_config_path', 'resolve_data_path', 'make_generator']
