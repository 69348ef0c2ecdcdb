"""Physical-layer arithmetic: modulation selection, carrier and slot sizing.

Traffic volumes are integer Gbps, spectrum is counted in integer frequency
slices (FS). An optical carrier (OC) occupies a fixed number of slices and
its bit rate depends on the modulation format, which in turn is limited by
transparent reach. The default tables model a 12.5 GHz grid with 320
slices per lane, 3-slice carriers at 32 Gbaud, and four DP formats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ScnPlanError, ModulationReachError


@dataclass(frozen=True)
class ModulationEntry:
    name: str
    gbps_per_oc: int
    reach_km: float


@dataclass(frozen=True)
class ModulationTable:
    """Formats ordered by rate; higher rates have shorter reach."""

    entries: tuple[ModulationEntry, ...]

    def __post_init__(self):
        if not self.entries:
            raise ScnPlanError("modulation table is empty")
        for a, b in zip(self.entries, self.entries[1:]):
            if not (a.gbps_per_oc < b.gbps_per_oc and a.reach_km > b.reach_km):
                raise ScnPlanError(
                    "modulation table must have strictly increasing rates "
                    "and strictly decreasing reaches"
                )

    @property
    def max_reach_km(self) -> float:
        return self.entries[0].reach_km


@dataclass(frozen=True)
class GridParams:
    """Per-lane spectrum grid: slice count and per-entity slice widths."""

    fs_max: int = 320
    fs_per_oc: int = 3
    fs_per_gb: int = 1
    fs_width_ghz: float = 12.5

    def __post_init__(self):
        if min(self.fs_max, self.fs_per_oc, self.fs_per_gb) <= 0 or self.fs_width_ghz <= 0:
            raise ScnPlanError("grid parameters must all be positive")

    @property
    def f_max(self) -> int:
        """Highest slice index (indices start at 0)."""
        return self.fs_max - 1

    @property
    def ocs_per_lane(self) -> int:
        return self.fs_max // self.fs_per_oc


@dataclass(frozen=True)
class Physics:
    modulations: ModulationTable
    grid: GridParams


DEFAULT_MODULATIONS = ModulationTable((
    ModulationEntry("DP-BPSK", 50, 6300.0),
    ModulationEntry("DP-QPSK", 100, 3500.0),
    ModulationEntry("DP-8QAM", 150, 1200.0),
    ModulationEntry("DP-16QAM", 200, 600.0),
))


def default_physics() -> Physics:
    return Physics(DEFAULT_MODULATIONS, GridParams())


def simplified_physics(gbps_per_fs: int = 25, fs_max: int = 320) -> Physics:
    """Fixed-capacity lanes with no modulation adaptivity.

    Every slice carries the same rate regardless of path length, so a full
    lane supports fs_max * gbps_per_fs (8 Tbps with the defaults). Useful
    for worked examples and didactic traces.
    """
    table = ModulationTable((ModulationEntry("fixed", gbps_per_fs, math.inf),))
    return Physics(table, GridParams(fs_max=fs_max, fs_per_oc=1))


def load_physics(doc: dict | str | Path) -> Physics:
    """Parse a physics configuration document (dict, JSON text, or path)."""
    if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
        return load_physics(Path(doc).read_text())
    if isinstance(doc, str):
        doc = json.loads(doc)
    table = ModulationTable(tuple(
        ModulationEntry(e["name"], int(e["gbps_per_oc"]), float(e["reach_km"]))
        for e in doc.get("modulations", [])
    )) if doc.get("modulations") else DEFAULT_MODULATIONS
    grid_doc = doc.get("grid", {})
    grid = GridParams(
        fs_max=int(grid_doc.get("fs_max", 320)),
        fs_per_oc=int(grid_doc.get("fs_per_oc", 3)),
        fs_per_gb=int(grid_doc.get("fs_per_gb", 1)),
        fs_width_ghz=float(grid_doc.get("fs_width_ghz", 12.5)),
    )
    return Physics(table, grid)


def highest_feasible_modulation(table: ModulationTable, length_km: float) -> ModulationEntry:
    """Fastest format whose reach covers the path length (inclusive)."""
    if length_km <= 0:
        raise ScnPlanError("path length must be positive")
    best = None
    for entry in table.entries:
        if entry.reach_km >= length_km:
            best = entry
    if best is None:
        raise ModulationReachError(
            f"path length {length_km} km exceeds the maximum reach "
            f"{table.max_reach_km} km"
        )
    return best


def ocs_required(t_gbps: int, t_oc_gbps: int) -> int:
    """Carriers needed to cover a traffic volume (ceiling division)."""
    if t_gbps < 0 or t_oc_gbps <= 0:
        raise ScnPlanError("traffic must be >= 0 and per-carrier rate > 0")
    return -(-t_gbps // t_oc_gbps)


def fs_required(grid: GridParams, n_oc: int) -> int:
    """Slices occupied by n adjacent carriers (no guard bands inside)."""
    if n_oc < 0:
        raise ScnPlanError("carrier count must be >= 0")
    return n_oc * grid.fs_per_oc


def supportable_traffic(physics: Physics, path_length_km: float, available_fs: int) -> int:
    """Traffic volume a slice budget can carry on a path of given length.

    Whole carriers only: slices left over after filling complete carriers
    contribute nothing.
    """
    if available_fs < 0:
        raise ScnPlanError("available slice count must be >= 0")
    entry = highest_feasible_modulation(physics.modulations, path_length_km)
    return (available_fs // physics.grid.fs_per_oc) * entry.gbps_per_oc
