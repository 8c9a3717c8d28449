"""Pairwise interaction weights between individuals at the same time."""

from .attraction_repulsion import (
    AttractionRepulsion,
    Breakpoints,
    InteractionFunction,
    NeutralInteraction,
    log_interaction_at_time,
    log_interaction_path,
    make_interaction,
    pair_distances,
    psi,
    solve_breakpoints,
)

__all__ = [
    "AttractionRepulsion",
    "Breakpoints",
    "InteractionFunction",
    "NeutralInteraction",
    "log_interaction_at_time",
    "log_interaction_path",
    "make_interaction",
    "pair_distances",
    "psi",
    "solve_breakpoints",
]
