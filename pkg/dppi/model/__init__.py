"""Joint density and forward simulators of the group movement model."""

from .joint import log_g, log_h, log_joint_unnormalized, pairwise_distance
from .scenarios import SCENARIOS, Scenario, default_start, get_scenario
from .simulate import simulate_dppi, simulate_independent

__all__ = [
    "SCENARIOS",
    "Scenario",
    "default_start",
    "get_scenario",
    "log_g",
    "log_h",
    "log_joint_unnormalized",
    "pairwise_distance",
    "simulate_dppi",
    "simulate_independent",
]
