"""Coevolving opinion/topology simulation with selective opinion disclosure."""

__version__ = "0.1.0"

from .config import SimConfig, parse_config
from .engine import SimResult, SimState, init, run, step
from .graph import GenSpec, SocialGraph, WeightInit, generate
from .model import Archetype, AgentSpec

__all__ = [
    "AgentSpec",
    "Archetype",
    "GenSpec",
    "SimConfig",
    "SimResult",
    "SimState",
    "SocialGraph",
    "WeightInit",
    "generate",
    "init",
    "parse_config",
    "run",
    "step",
]
