"""Desk-scale laboratory for coupled horseshoe maps on the unit cube."""

__version__ = "0.1.0"

from .errors import ConfigError, LabError  # noqa: E402,F401
from .geometry import BlockSystem, validate_system, rates, shape_constants  # noqa: E402,F401
from .hmap import build_map, Perturbation  # noqa: E402,F401
