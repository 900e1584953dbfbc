"""Exact tail asymptotics for stationary quarter-plane random walks."""

from .errors import QPWalkError
from .model import WalkSpec, load_model, validate_spec
from .pipeline import analyze_walk

__all__ = ["QPWalkError", "WalkSpec", "analyze_walk", "load_model", "validate_spec"]
__version__ = "0.1.0"
