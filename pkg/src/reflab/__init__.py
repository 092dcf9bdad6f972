"""Refinable distributions, Mahler measures, PV-number orbits and quasilattices."""
from .errors import NumericError, PropertyViolation, ReflabError, ValidationError

__version__ = "0.1.0"

__all__ = ["ReflabError", "ValidationError", "NumericError", "PropertyViolation", "__version__"]
