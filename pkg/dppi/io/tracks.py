"""
Delimited text formats for tracks, latent states, draws and curves.

Every file has a header row and one record per line, UTF-8 with LF line
endings. Floats are written with 17 significant digits so values survive a
save/load cycle bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..contracts.errors import TrackFormatError
from ..contracts.models import STATE_COMPONENTS, ObservationSet, PathSet, TimeGrid
from ..inference.samplers import PosteriorSamples
from ..summaries.envelope import Envelope
from ..summaries.kstar import KStarCurve

logger = logging.getLogger(__name__)


def fmt(value: float) -> str:
    return format(float(value), ".17g")


class TrackColumns(BaseModel):
    """Column names of a track file; adapts files with other naming conventions."""

    time: str = Field(default="time", description="Observation time (seconds)")
    id: str = Field(default="id", description="Individual label")
    x: str = Field(default="x", description="x location (pixels)")
    y: str = Field(default="y", description="y location (pixels)")
    delimiter: str = Field(default=",", min_length=1, max_length=1)


def _table(header: Iterable[str], rows: Iterable[Iterable[str]], delimiter: str = ",") -> str:
    lines = [delimiter.join(header)]
    lines.extend(delimiter.join(r) for r in rows)
    return "\n".join(lines) + "\n"


def parse_tracks(text: str, columns: Optional[TrackColumns] = None) -> ObservationSet:
    """Turn track text into a rectangular panel; individuals keep their first-appearance order.

    Raises:
        TrackFormatError: BAD_COLUMNS, NON_MONOTONE_TIME or NON_RECTANGULAR
    """
    columns = columns or TrackColumns()
    reader = csv.DictReader(io.StringIO(text), delimiter=columns.delimiter)
    wanted = [columns.time, columns.id, columns.x, columns.y]
    missing = [c for c in wanted if c not in (reader.fieldnames or [])]
    if missing:
        raise TrackFormatError("BAD_COLUMNS", f"missing columns {missing}; found {reader.fieldnames}")

    cells: Dict[tuple, tuple] = {}
    last_time: Dict[str, float] = {}
    ids: List[str] = []
    for line_no, record in enumerate(reader, start=2):
        try:
            t = float(record[columns.time])
            x, y = float(record[columns.x]), float(record[columns.y])
        except (TypeError, ValueError) as e:
            raise TrackFormatError("BAD_COLUMNS", f"line {line_no}: {e}") from e
        ident = record[columns.id]
        if ident not in last_time:
            ids.append(ident)
        elif not t > last_time[ident]:
            raise TrackFormatError(
                "NON_MONOTONE_TIME", f"line {line_no}: time {t} of '{ident}' does not follow {last_time[ident]}"
            )
        last_time[ident] = t
        cells[(t, ident)] = (x, y)

    times = sorted({t for t, _ in cells})
    absent = [(t, ident) for t in times for ident in ids if (t, ident) not in cells]
    if absent:
        shown = ", ".join(f"({t:g}, {i})" for t, i in absent[:10])
        more = f" and {len(absent) - 10} more" if len(absent) > 10 else ""
        raise TrackFormatError("NON_RECTANGULAR", f"missing (time, id) cells: {shown}{more}")
    obs = np.array([[cells[(t, ident)] for ident in ids] for t in times], dtype=float)
    try:
        return ObservationSet(obs=obs, grid=TimeGrid(times=times), ids=ids)
    except ValueError as e:
        raise TrackFormatError("NON_RECTANGULAR", str(e)) from e


def load_tracks(path: Path, columns: Optional[TrackColumns] = None) -> ObservationSet:
    """Read a track file with one (time, id, x, y) row per observation."""
    obs = parse_tracks(Path(path).read_text(encoding="utf-8"), columns)
    logger.info("loaded %s: K=%d N=%d", path, obs.k, obs.n)
    return obs


def format_tracks(obs: ObservationSet) -> str:
    rows = (
        (fmt(t), ident, fmt(obs.obs[i, k, 0]), fmt(obs.obs[i, k, 1]))
        for i, t in enumerate(obs.grid.times)
        for k, ident in enumerate(obs.ids)
    )
    return _table(("time", "id", "x", "y"), rows)


def save_tracks(obs: ObservationSet, path: Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_tracks(obs))
    return path


def format_latent(paths: PathSet, ids: Optional[List[str]] = None) -> str:
    ids = ids or [str(k) for k in range(paths.k)]
    rows = (
        (fmt(t), ident, *(fmt(v) for v in paths.states[i, k]))
        for i, t in enumerate(paths.grid.times)
        for k, ident in enumerate(ids)
    )
    return _table(("time", "id") + STATE_COMPONENTS, rows)


def format_samples(samples: PosteriorSamples) -> str:
    return _table(samples.names, ([fmt(v) for v in row] for row in samples.draws))


def samples_metadata(samples: PosteriorSamples) -> dict:
    """Everything but the draws and path snapshots, for the JSON sidecar."""
    return samples.model_dump(mode="json", exclude={"draws", "paths"})


def save_samples(samples: PosteriorSamples, path: Path) -> Path:
    """Write draws to path and their metadata to the same name with a .json suffix."""
    path = Path(path)
    path.write_text(format_samples(samples), encoding="utf-8")
    path.with_suffix(".json").write_text(
        json.dumps(samples_metadata(samples), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path


def load_samples(path: Path) -> PosteriorSamples:
    """Read draws and their sidecar metadata written by ``save_samples``."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        names = next(reader)
        draws = [[float(v) for v in row] for row in reader if row]
    meta["names"] = names
    if meta.get("latent_acceptance") is None:
        meta.pop("latent_acceptance", None)
    return PosteriorSamples(draws=np.array(draws, dtype=float).reshape(-1, len(names)), **meta)


def format_curve(curve: KStarCurve) -> str:
    rows = ((fmt(d), str(int(c))) for d, c in zip(curve.distances, curve.counts))
    return _table(("d", "count"), rows)


def format_envelope(envelope: Envelope) -> str:
    rows = ((fmt(d), fmt(lo), fmt(hi)) for d, lo, hi in zip(envelope.distances, envelope.lower, envelope.upper))
    return _table(("d", "lower", "upper"), rows)
