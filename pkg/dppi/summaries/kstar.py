"""
Cumulative pair-count statistic K*(d).

K*(d) counts, over every time point and unordered pair, the pairwise
distances strictly below d. It stands in for Ripley's K, which needs an
intensity the movement model does not have.
"""

from __future__ import annotations

from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..contracts.errors import DomainError
from ..contracts.models import ObservationSet, PathSet
from ..interaction.attraction_repulsion import pair_distances

DEFAULT_GRID_POINTS = 100


class KStarCurve(BaseModel):
    """Pair counts on an increasing distance grid."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    distances: np.ndarray = Field(description="Increasing distance grid")
    counts: np.ndarray = Field(description="Number of pairwise distances below each grid value")
    total_pairs: int = Field(ge=0, description="N * K(K-1)/2")

    @field_validator("distances", "counts", mode="before")
    @classmethod
    def as_vector(cls, v) -> np.ndarray:
        return np.asarray(v).ravel()

    @model_validator(mode="after")
    def check_curve(self) -> "KStarCurve":
        if self.distances.shape != self.counts.shape:
            raise ValueError("distances and counts must have the same length")
        if np.any(np.diff(self.counts) < 0) or (self.counts.size and self.counts[-1] > self.total_pairs):
            raise ValueError("counts must be non-decreasing and bounded by the number of pairs")
        return self


def _locations(panel: Union[PathSet, ObservationSet, np.ndarray]) -> np.ndarray:
    if isinstance(panel, PathSet):
        return panel.locations()
    if isinstance(panel, ObservationSet):
        return panel.obs
    return np.asarray(panel, dtype=float)


def default_distance_grid(panel, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Equally spaced grid from 0 to the largest pairwise distance of the panel."""
    return np.linspace(0.0, float(np.max(pair_distances(_locations(panel)))), points)


def kstar(panel: Union[PathSet, ObservationSet, np.ndarray], distances) -> KStarCurve:
    """K* on true locations of a PathSet, or observed locations of an ObservationSet.

    Raises:
        DomainError: If fewer than two individuals are present
    """
    loc = _locations(panel)
    if loc.shape[-2] < 2:
        raise DomainError("TOO_FEW_INDIVIDUALS", "K* needs at least two individuals")
    deltas = np.sort(pair_distances(loc), axis=None)
    distances = np.asarray(distances, dtype=float)
    counts = np.searchsorted(deltas, distances, side="left")
    return KStarCurve(distances=distances, counts=counts.astype(np.int64), total_pairs=deltas.size)
